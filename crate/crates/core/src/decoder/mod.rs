//! Syndrome extraction and decoding.
//!
//! The joint decoder works on the polarized and precoded source symbols
//! `s = [n_X·G·T | n_Z·J·G·T]`. Frozen symbols are the measured syndrome;
//! information symbols are estimated by successive cancellation.

mod binary;
mod quad;
mod quantum;

pub use binary::{
    binary_sc_decode, binary_scl_decode, binary_syndrome, binary_syndrome_decode, branch_metric,
    check_node, hard_decision, variable_node,
};
pub use quad::{butterfly_inputs, Quad};
pub use quantum::{quantum_scl_decode, QuantumDecoder, QuantumDecoding};

use crate::bitmatrix::{polar_transform_in_place, BitVec};
use crate::channel::{Pauli, PauliVec};
use crate::code::QuantumCode;
use crate::error::{Error, Result};

/// Measured X and Z syndromes, each indexed by the frozen set in ascending
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SyndromePair {
    pub sx: BitVec,
    pub sz: BitVec,
}

impl SyndromePair {
    pub fn zeros(len: usize) -> Self {
        Self {
            sx: BitVec::zeros(len),
            sz: BitVec::zeros(len),
        }
    }

    /// Two-bit symbol at frozen position `k`.
    #[inline]
    pub fn symbol(&self, k: usize) -> u8 {
        u8::from(self.sx.get(k)) | (u8::from(self.sz.get(k)) << 1)
    }

    pub fn is_zero(&self) -> bool {
        self.sx.is_zero() && self.sz.is_zero()
    }
}

/// Full source-symbol vector `s` of a noise pattern, as `x | z << 1` per
/// index: X part `n_X·G·T`, Z part `n_Z·J·G·T`.
pub fn source_symbols(noise: &PauliVec, code: &QuantumCode) -> Result<Vec<u8>> {
    let n = code.n();
    if noise.len() != n {
        return Err(Error::invalid(format!(
            "noise has length {} but the code has N={n}",
            noise.len()
        )));
    }
    let mut x = noise.x.to_bits();
    let mut z: Vec<u8> = (0..n).map(|i| u8::from(noise.z.get(n - 1 - i))).collect();
    polar_transform_in_place(&mut x);
    polar_transform_in_place(&mut z);
    let mut s: Vec<u8> = x.iter().zip(&z).map(|(&a, &b)| a | (b << 1)).collect();
    code.precoder().apply(&mut s);
    Ok(s)
}

/// Classical emulation of the stabilizer measurement.
pub fn measure_syndrome(noise: &PauliVec, code: &QuantumCode) -> Result<SyndromePair> {
    let s = source_symbols(noise, code)?;
    let frozen = code.spec().frozen_set();
    let sx: Vec<bool> = frozen.iter().map(|&f| s[f] & 1 != 0).collect();
    let sz: Vec<bool> = frozen.iter().map(|&f| s[f] & 2 != 0).collect();
    Ok(SyndromePair {
        sx: BitVec::from_bools(&sx),
        sz: BitVec::from_bools(&sz),
    })
}

/// Inverts [`source_symbols`]: `r = s·T`, `n_X = r^X·G`, `n_Z = (r^Z·G)·J`.
pub fn noise_from_symbols(s: &[u8], code: &QuantumCode) -> Result<PauliVec> {
    let n = code.n();
    if s.len() != n {
        return Err(Error::invalid(format!(
            "expected {n} symbols, got {}",
            s.len()
        )));
    }
    let mut r = s.to_vec();
    code.precoder().apply(&mut r);
    Ok(noise_from_polarized(&r))
}

/// Physical noise from polarized symbols `r`.
pub(crate) fn noise_from_polarized(r: &[u8]) -> PauliVec {
    let mut x: Vec<u8> = r.iter().map(|&v| v & 1).collect();
    let mut z: Vec<u8> = r.iter().map(|&v| (v >> 1) & 1).collect();
    polar_transform_in_place(&mut x);
    polar_transform_in_place(&mut z);
    z.reverse();
    PauliVec {
        x: BitVec::from_bits(&x),
        z: BitVec::from_bits(&z),
    }
}

/// Success iff the estimate agrees with the true source symbols on every
/// logical index, in both components.
pub fn is_logical_success(s_hat: &[Pauli], truth: &PauliVec, code: &QuantumCode) -> Result<bool> {
    if s_hat.len() != code.n() {
        return Err(Error::invalid(format!(
            "expected {} symbols, got {}",
            code.n(),
            s_hat.len()
        )));
    }
    let s_true = source_symbols(truth, code)?;
    Ok(code
        .logical_set()
        .iter()
        .all(|&i| s_hat[i].symbol() == s_true[i]))
}
