//! Depolarizing noise and Pauli bookkeeping.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitmatrix::BitVec;
use crate::decoder::Quad;
use crate::error::{Error, Result};

/// Single-qubit Pauli. The discriminant is the two-bit symbol `x | z << 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Pauli {
    I = 0,
    X = 1,
    Z = 2,
    Y = 3,
}

impl Pauli {
    /// Branch order used by the list decoder.
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::Y];

    pub fn from_bits(x: bool, z: bool) -> Self {
        Self::from_symbol(u8::from(x) | (u8::from(z) << 1))
    }

    /// Panics if `s > 3`.
    pub fn from_symbol(s: u8) -> Self {
        match s {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Z,
            3 => Pauli::Y,
            _ => panic!("invalid Pauli symbol {s}"),
        }
    }

    #[inline]
    pub fn symbol(self) -> u8 {
        self as u8
    }

    #[inline]
    pub fn x(self) -> bool {
        self.symbol() & 1 != 0
    }

    #[inline]
    pub fn z(self) -> bool {
        self.symbol() & 2 != 0
    }

    /// Product up to phase.
    pub fn mul(self, other: Pauli) -> Pauli {
        Self::from_symbol(self.symbol() ^ other.symbol())
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Z => 'Z',
            Pauli::Y => 'Y',
        };
        write!(f, "{c}")
    }
}

/// An `N`-qubit Pauli operator in `[x | z]` form, phases dropped.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliVec {
    pub x: BitVec,
    pub z: BitVec,
}

impl PauliVec {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVec::zeros(n),
            z: BitVec::zeros(n),
        }
    }

    pub fn new(x: BitVec, z: BitVec) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::invalid(format!(
                "x has length {} but z has length {}",
                x.len(),
                z.len()
            )));
        }
        Ok(Self { x, z })
    }

    pub fn from_paulis(ps: &[Pauli]) -> Self {
        let x: Vec<bool> = ps.iter().map(|p| p.x()).collect();
        let z: Vec<bool> = ps.iter().map(|p| p.z()).collect();
        Self {
            x: BitVec::from_bools(&x),
            z: BitVec::from_bools(&z),
        }
    }

    /// Per-qubit symbols `x | z << 1`.
    pub fn from_symbols(s: &[u8]) -> Self {
        let x: Vec<bool> = s.iter().map(|&v| v & 1 != 0).collect();
        let z: Vec<bool> = s.iter().map(|&v| v & 2 != 0).collect();
        Self {
            x: BitVec::from_bools(&x),
            z: BitVec::from_bools(&z),
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn get(&self, i: usize) -> Pauli {
        Pauli::from_bits(self.x.get(i), self.z.get(i))
    }

    pub fn set(&mut self, i: usize, p: Pauli) {
        self.x.set(i, p.x());
        self.z.set(i, p.z());
    }

    pub fn symbols(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.get(i).symbol()).collect()
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        (0..self.len()).filter(|&i| self.x.get(i) || self.z.get(i)).count()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Componentwise product up to phase.
    pub fn mul_assign(&mut self, other: &PauliVec) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// Natural log of the i.i.d. depolarizing probability of this operator.
    pub fn log_likelihood(&self, param: ChannelParam) -> f64 {
        let w = self.weight() as f64;
        let n = self.len() as f64;
        let p = param.p();
        let ln_err = if w > 0.0 { w * (p / 3.0).ln() } else { 0.0 };
        let ln_id = if n - w > 0.0 { (n - w) * (1.0 - p).ln() } else { 0.0 };
        ln_err + ln_id
    }
}

impl fmt::Debug for PauliVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len()).map(|i| self.get(i).to_string()).collect();
        write!(f, "PauliVec({s})")
    }
}

/// Depolarizing probability `p`; X, Z and Y each occur with `p/3`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ChannelParam {
    p: f64,
}

impl ChannelParam {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("depolarizing probability must lie in [0, 1], got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(self) -> f64 {
        self.p
    }
}

/// Per-qubit prior `(1−p, p/3, p/3, p/3)`.
pub fn prior_quad(param: ChannelParam) -> Quad {
    let e = param.p() / 3.0;
    Quad::new([1.0 - param.p(), e, e, e])
}

/// Independent generator for one trial: ChaCha8 keyed by the master seed,
/// with the trial index selecting the stream.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Draws i.i.d. depolarizing noise from `rng`.
///
/// One uniform is consumed per qubit; `u < p` selects an error whose type is
/// `⌊3u/p⌋`, so a fixed stream yields nested error patterns as `p` grows.
pub fn sample_depolarizing_with<R: Rng + ?Sized>(param: ChannelParam, n: usize, rng: &mut R) -> PauliVec {
    let p = param.p();
    let mut out = PauliVec::identity(n);
    for i in 0..n {
        let u: f64 = rng.random();
        if u < p {
            let k = ((3.0 * u / p) as usize).min(2);
            out.set(i, [Pauli::X, Pauli::Z, Pauli::Y][k]);
        }
    }
    out
}

/// Seeded form of [`sample_depolarizing_with`].
pub fn sample_depolarizing(param: ChannelParam, n: usize, seed: u64) -> PauliVec {
    sample_depolarizing_with(param, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn param_range() {
        assert!(ChannelParam::new(-0.1).is_err());
        assert!(ChannelParam::new(1.1).is_err());
        assert!(ChannelParam::new(f64::NAN).is_err());
        assert!(ChannelParam::new(0.0).is_ok());
        assert!(ChannelParam::new(1.0).is_ok());
    }

    #[test]
    fn extreme_probabilities() {
        let zero = sample_depolarizing(ChannelParam::new(0.0).unwrap(), 1000, 7);
        assert!(zero.is_identity());
        let one = sample_depolarizing(ChannelParam::new(1.0).unwrap(), 1000, 7);
        assert_eq!(one.weight(), 1000);
    }

    #[test]
    fn prior_quad_examples() {
        let q = prior_quad(ChannelParam::new(0.0).unwrap());
        assert_eq!(q.probs(), [1.0, 0.0, 0.0, 0.0]);
        let q = prior_quad(ChannelParam::new(0.75).unwrap());
        for v in q.probs() {
            assert!((v - 0.25).abs() < 1e-15);
        }
        let q = prior_quad(ChannelParam::new(0.1).unwrap());
        assert!((q.probs()[0] - 0.9).abs() < 1e-15);
        for v in &q.probs()[1..] {
            assert!((v - 0.1 / 3.0).abs() < 1e-15);
        }
        for p in [0.0, 0.01, 0.3, 0.9, 1.0] {
            let s: f64 = prior_quad(ChannelParam::new(p).unwrap()).probs().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reproducible_per_seed_and_trial() {
        let param = ChannelParam::new(0.2).unwrap();
        assert_eq!(sample_depolarizing(param, 500, 3), sample_depolarizing(param, 500, 3));
        let a = sample_depolarizing_with(param, 500, &mut trial_rng(9, 4));
        let b = sample_depolarizing_with(param, 500, &mut trial_rng(9, 4));
        let c = sample_depolarizing_with(param, 500, &mut trial_rng(9, 5));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn error_statistics() {
        let n = 100_000;
        let p = 0.3;
        let noise = sample_depolarizing(ChannelParam::new(p).unwrap(), n, 11);
        let mut counts = [0usize; 4];
        for i in 0..n {
            counts[noise.get(i).symbol() as usize] += 1;
        }
        let errors = (n - counts[0]) as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((errors - n as f64 * p).abs() < 3.0 * sigma, "{errors}");
        let expected = errors / 3.0;
        let chi2: f64 = counts[1..]
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square, 2 degrees of freedom, alpha = 0.01
        assert!(chi2 < 9.210, "{chi2}");
    }

    #[test]
    fn pauli_algebra() {
        assert_eq!(Pauli::X.mul(Pauli::Z), Pauli::Y);
        assert_eq!(Pauli::Y.mul(Pauli::Y), Pauli::I);
        assert_eq!(Pauli::from_bits(true, true), Pauli::Y);
        let v = PauliVec::from_paulis(&[Pauli::I, Pauli::X, Pauli::Z, Pauli::Y]);
        assert_eq!(v.symbols(), vec![0, 1, 2, 3]);
        assert_eq!(v.weight(), 3);
        assert_eq!(format!("{v:?}"), "PauliVec(IXZY)");
        let p = ChannelParam::new(0.3).unwrap();
        let expected = 0.7f64.ln() + 3.0 * 0.1f64.ln();
        assert!((v.log_likelihood(p) - expected).abs() < 1e-12);
    }
}
