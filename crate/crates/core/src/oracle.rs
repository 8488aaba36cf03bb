//! Brute-force references built from dense matrices, for checking the fast
//! paths on small codes.

use crate::bitmatrix::{reference, BitMatrix};
use crate::channel::{ChannelParam, Pauli, PauliVec};
use crate::code::QuantumCode;
use crate::decoder::SyndromePair;
use crate::error::{Error, Result};

/// Largest blocklength accepted by [`exhaustive_map_decode`].
pub const MAX_ORACLE_N: usize = 8;
/// Largest blocklength accepted by [`dense_reference_transforms`].
pub const MAX_DENSE_N: usize = 256;

const TIE_TOLERANCE: f64 = 1e-9;

/// Most likely coset member found by enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleDecoding {
    pub s_best: Vec<Pauli>,
    pub noise: PauliVec,
    /// `−ln P(noise)`.
    pub pm_best: f64,
}

fn dense_t(code: &QuantumCode) -> reference::Dense {
    let n = code.n();
    let mut t = vec![vec![0u8; n]; n];
    for (i, row) in t.iter_mut().enumerate() {
        row[i] = 1;
    }
    for &(i, j) in code.precoder().off_diag() {
        t[i][j] = 1;
    }
    t
}

/// Enumerates every assignment of the information symbols, fills frozen
/// positions from the syndrome, rebuilds the physical noise with dense
/// products and keeps the most likely one. Ties within a relative `1e-9`
/// go to the lexicographically smallest `ŝ` (I < X < Z < Y).
pub fn exhaustive_map_decode(
    syndrome: &SyndromePair,
    code: &QuantumCode,
    param: ChannelParam,
) -> Result<OracleDecoding> {
    let n = code.n();
    if n > MAX_ORACLE_N {
        return Err(Error::invalid(format!(
            "exhaustive decoding is limited to N <= {MAX_ORACLE_N}, got {n}"
        )));
    }
    let frozen = code.spec().frozen_set();
    if syndrome.sx.len() != frozen.len() || syndrome.sz.len() != frozen.len() {
        return Err(Error::invalid("syndrome length does not match |F|"));
    }
    let info = code.spec().info_set().to_vec();
    let k = info.len();
    let g = reference::polar(code.spec().n_exp());
    let t = dense_t(code);
    let ln_id = (1.0 - param.p()).ln();
    let ln_err = (param.p() / 3.0).ln();

    let mut scored: Vec<(f64, Vec<u8>, Vec<u8>, Vec<u8>)> = Vec::with_capacity(1 << (2 * k));
    for m in 0..(1usize << (2 * k)) {
        let mut s = vec![0u8; n];
        for (slot, &f) in frozen.iter().enumerate() {
            s[f] = syndrome_symbol(syndrome, slot);
        }
        for (pos, &i) in info.iter().enumerate() {
            s[i] = ((m >> (2 * (k - 1 - pos))) & 3) as u8;
        }
        let sx: Vec<u8> = s.iter().map(|v| v & 1).collect();
        let sz: Vec<u8> = s.iter().map(|v| v >> 1).collect();
        let nx = reference::vec_mul(&reference::vec_mul(&sx, &t), &g);
        let mut nz = reference::vec_mul(&reference::vec_mul(&sz, &t), &g);
        nz.reverse();
        let mut pm = 0.0;
        for q in 0..n {
            pm -= if nx[q] | nz[q] != 0 { ln_err } else { ln_id };
        }
        scored.push((pm, s, nx, nz));
    }
    let min = scored.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let slack = TIE_TOLERANCE * (1.0 + min.abs());
    let (pm, s, nx, nz) = scored
        .into_iter()
        .find(|e| e.0 <= min + slack)
        .expect("at least one hypothesis");
    let noise = PauliVec {
        x: crate::bitmatrix::BitVec::from_bits(&nx),
        z: crate::bitmatrix::BitVec::from_bits(&nz),
    };
    Ok(OracleDecoding {
        s_best: s.into_iter().map(Pauli::from_symbol).collect(),
        noise,
        pm_best: pm,
    })
}

fn syndrome_symbol(s: &SyndromePair, slot: usize) -> u8 {
    u8::from(s.sx.get(slot)) | (u8::from(s.sz.get(slot)) << 1)
}

/// Dense `H̃_X = F_XᵀTG`, `H̃_Z = F_ZᵀTᵀGᵀ`, `G·T` and `J·G·T`, each built
/// from explicit Kronecker products and selection matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseTransforms {
    pub hx: BitMatrix,
    pub hz: BitMatrix,
    pub gt: BitMatrix,
    pub jgt: BitMatrix,
}

pub fn dense_reference_transforms(code: &QuantumCode) -> Result<DenseTransforms> {
    let n = code.n();
    if n > MAX_DENSE_N {
        return Err(Error::invalid(format!(
            "dense transforms are limited to N <= {MAX_DENSE_N}, got {n}"
        )));
    }
    let g = BitMatrix::kron_power(&BitMatrix::kernel(), code.spec().n_exp());
    let j = BitMatrix::exchange(n);
    let t = code.precoder().to_dense();
    let fz = BitMatrix::selection(n, &code.spec().frozen_set())?;
    let fx = BitMatrix::selection(n, &code.spec().reversed_frozen_set())?;
    let gt = g.mat_mul(&t)?;
    let jgt = j.mat_mul(&gt)?;
    let hx = fx.transpose().mat_mul(&t)?.mat_mul(&g)?;
    let hz = fz.transpose().mat_mul(&t.transpose())?.mat_mul(&g.transpose())?;
    Ok(DenseTransforms { hx, hz, gt, jgt })
}
