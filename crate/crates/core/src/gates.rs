//! Clifford gate accounting for encoding and syndrome extraction.

use serde::{Deserialize, Serialize};

use crate::bitmatrix::{BitMatrix, MAX_DENSE_EXP};
use crate::code::{Precoder, QuantumCode};
use crate::error::{Error, Result};

/// Two-qubit Clifford count of the surface-code syndrome extraction used as
/// a reference point in reports.
pub const SURFACE_CODE_REFERENCE_GATES: usize = 4704;

/// One additional encoder CNOT per off-diagonal precoder entry.
pub fn encoder_extra_gates(t: &Precoder) -> usize {
    t.off_diag().len()
}

/// Syndrome-extraction counts derived from the stabilizer weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeGates {
    /// `‖FᵀTᵀGᵀ‖₀`.
    pub stab_nnz: usize,
    /// One gate per stabilizer entry in each of the X and Z sectors.
    pub total_gates: usize,
    /// `‖FᵀTᵀGᵀ‖₀ − ‖FᵀGᵀ‖₀`.
    pub delta_vs_unprecoded: i64,
}

impl SyndromeGates {
    /// Counts for a given stabilizer weight and unprecoded weight.
    pub fn from_counts(stab_nnz: usize, unprecoded_nnz: usize) -> Self {
        Self {
            stab_nnz,
            total_gates: 2 * stab_nnz,
            delta_vs_unprecoded: stab_nnz as i64 - unprecoded_nnz as i64,
        }
    }
}

/// Computes the counts from dense `G·T` restricted to the frozen columns,
/// which is the transpose of `FᵀTᵀGᵀ`.
pub fn syndrome_extraction_gates(code: &QuantumCode) -> Result<SyndromeGates> {
    let spec = code.spec();
    if spec.n_exp() > MAX_DENSE_EXP {
        return Err(Error::invalid("gate counting is limited to N <= 4096"));
    }
    let frozen = spec.frozen_set();
    let g = BitMatrix::polar(spec.n_exp())?;
    let plain = g.project_columns(&frozen)?.nnz();
    let precoded = g.mat_mul(&code.precoder().to_dense())?.project_columns(&frozen)?.nnz();
    Ok(SyndromeGates::from_counts(precoded, plain))
}

/// Full report as emitted by the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateReport {
    pub n: usize,
    pub precoder_nnz: usize,
    pub encoder_extra_gates: usize,
    pub stab_nnz: usize,
    pub total_gates: usize,
    pub delta_vs_unprecoded: i64,
    pub surface_code_reference: usize,
}

pub fn gate_report(code: &QuantumCode) -> Result<GateReport> {
    let s = syndrome_extraction_gates(code)?;
    Ok(GateReport {
        n: code.n(),
        precoder_nnz: code.precoder().nnz(),
        encoder_extra_gates: encoder_extra_gates(code.precoder()),
        stab_nnz: s.stab_nnz,
        total_gates: s.total_gates,
        delta_vs_unprecoded: s.delta_vs_unprecoded,
        surface_code_reference: SURFACE_CODE_REFERENCE_GATES,
    })
}
