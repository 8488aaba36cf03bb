//! Four-symbol messages of the joint X/Z decoder.
//!
//! Symbols are `x | z << 1` (I, X, Z, Y). The X part of the noise polarizes
//! through `G₂` and the Z part, measured on the reversal, through the kernel
//! of `G·J`. At one butterfly with upper input `a` and lower input `b` this
//! makes the upper virtual symbol `a ⊕ b` in both components, while the
//! lower virtual symbol is `(x_b, z_a)`.

use crate::error::{Error, Result};

/// Probability vector over `{I, X, Z, Y}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad([f64; 4]);

impl Quad {
    /// Stores the values as given; no normalization.
    pub const fn new(p: [f64; 4]) -> Self {
        Self(p)
    }

    pub const fn uniform() -> Self {
        Self([0.25; 4])
    }

    pub fn point(symbol: u8) -> Self {
        let mut p = [0.0; 4];
        p[symbol as usize] = 1.0;
        Self(p)
    }

    #[inline]
    pub fn get(&self, symbol: u8) -> f64 {
        self.0[symbol as usize]
    }

    pub fn probs(&self) -> [f64; 4] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Scales to unit mass; zero or non-finite mass is degenerate.
    #[inline]
    pub fn normalized(self) -> Result<Self> {
        let s = self.sum();
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::DegenerateMessage);
        }
        let inv = 1.0 / s;
        Ok(Self(self.0.map(|v| v * inv)))
    }

    /// Upper-branch message: `out(s) ∝ Σ_t a(s ⊕ t)·b(t)`.
    ///
    /// Falls back to the uniform quad if both inputs carry no mass, which
    /// only arises from already-degenerate paths.
    #[inline]
    pub fn combine(a: &Quad, b: &Quad) -> Quad {
        let [a0, a1, a2, a3] = a.0;
        let [b0, b1, b2, b3] = b.0;
        let out = Quad([
            a0 * b0 + a1 * b1 + a2 * b2 + a3 * b3,
            a1 * b0 + a0 * b1 + a3 * b2 + a2 * b3,
            a2 * b0 + a3 * b1 + a0 * b2 + a1 * b3,
            a3 * b0 + a2 * b1 + a1 * b2 + a0 * b3,
        ]);
        out.normalized().unwrap_or(Quad::uniform())
    }

    /// Lower-branch message given the decided upper symbol `d`:
    /// `out(s) ∝ a(s ⊕ d_x)·b(s ⊕ d_z)`.
    #[inline]
    pub fn split(a: &Quad, b: &Quad, decided: u8) -> Result<Quad> {
        let ax = decided & 1;
        let bz = decided & 2;
        let mut out = [0.0; 4];
        for (s, o) in out.iter_mut().enumerate() {
            let s = s as u8;
            *o = a.get(s ^ ax) * b.get(s ^ bz);
        }
        Quad(out).normalized()
    }
}

/// Re-encodes a decided butterfly: from upper symbol `s1` and lower symbol
/// `s2`, returns the symbols on the upper and lower inputs.
#[inline]
pub fn butterfly_inputs(s1: u8, s2: u8) -> (u8, u8) {
    let t = s1 ^ s2;
    ((t & 1) | (s2 & 2), (s2 & 1) | (t & 2))
}
