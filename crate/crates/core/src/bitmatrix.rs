//! Bit-packed linear algebra over F2.
//!
//! [`BitVec`] and [`BitMatrix`] pack bits into `u64` words. The polar
//! transform is computed with the in-place butterfly and never materializes
//! `G`; dense Kronecker powers are available up to [`MAX_DENSE_EXP`] for
//! validation and gate counting. [`reference`] holds an unpacked, naive
//! implementation used for differential testing.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// Largest stage count for which dense `N × N` matrices are materialized.
pub const MAX_DENSE_EXP: u32 = 12;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// Fixed-length vector over F2.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector from `0`/`1` values; any nonzero byte is a one.
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b != 0 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Vector of length `len` with ones at `support`.
    pub fn from_support(len: usize, support: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len);
        for &i in support {
            if i >= len {
                return Err(Error::invalid(format!("index {i} out of range for length {len}")));
            }
            v.set(i, true);
        }
        Ok(v)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Inner product over F2.
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "length mismatch in dot");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            & 1
            == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions of the ones, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + t)
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    /// Restriction to the listed positions, in the order given.
    pub fn select(&self, idx: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(idx.len());
        for (k, &i) in idx.iter().enumerate() {
            out.set(k, self.get(i));
        }
        out
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec[")?;
        for b in self.iter() {
            write!(f, "{}", u8::from(b))?;
        }
        write!(f, "]")
    }
}

/// In-place polar transform `x = u·G₂^⊗n` on unpacked bits.
///
/// The slice length must be a power of two; this is checked by the public
/// wrappers.
pub fn polar_transform_in_place(bits: &mut [u8]) {
    let n = bits.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for j in block..block + half {
                bits[j] ^= bits[j + half];
            }
        }
        half <<= 1;
    }
}

/// Returns `u·G` with `G = G₂^⊗n_exp`. `G` is an involution, so applying the
/// transform twice is the identity.
pub fn polar_transform(u: &BitVec, n_exp: u32) -> Result<BitVec> {
    check_len(u.len(), n_exp)?;
    let mut bits = u.to_bits();
    polar_transform_in_place(&mut bits);
    Ok(BitVec::from_bits(&bits))
}

fn check_len(len: usize, n_exp: u32) -> Result<()> {
    if n_exp >= usize::BITS || len != 1usize << n_exp {
        return Err(Error::invalid(format!(
            "length {len} is not 2^{n_exp}"
        )));
    }
    Ok(())
}

/// Index reversal `v·J`.
pub fn reverse(v: &BitVec) -> BitVec {
    let n = v.len();
    let mut out = BitVec::zeros(n);
    for i in v.ones() {
        out.set(n - 1 - i, true);
    }
    out
}

/// Dense matrix over F2, stored as bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: Vec<BitVec>,
    cols: usize,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows: vec![BitVec::zeros(cols); rows],
            cols,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// The exchange (anti-identity) matrix `J`.
    pub fn exchange(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, n - 1 - i, true);
        }
        m
    }

    /// The base polarization kernel `G₂ = [[1,0],[1,1]]`.
    pub fn kernel() -> Self {
        Self::from_rows(&[vec![1, 0], vec![1, 1]]).expect("static kernel")
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Ok(Self {
            rows: rows.iter().map(|r| BitVec::from_bits(r)).collect(),
            cols,
        })
    }

    pub fn from_bitvec_rows(rows: Vec<BitVec>, cols: usize) -> Result<Self> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("row length differs from column count"));
        }
        Ok(Self { rows, cols })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn row(&self, r: usize) -> &BitVec {
        &self.rows[r]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Exact F2 product `self · other`.
    pub fn mat_mul(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.rows() {
            return Err(Error::invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols,
                other.rows(),
                other.cols
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = BitVec::zeros(other.cols);
                for k in row.ones() {
                    acc.xor_assign(&other.rows[k]);
                }
                acc
            })
            .collect();
        Ok(BitMatrix {
            rows,
            cols: other.cols,
        })
    }

    /// Row vector times matrix, `v · self`.
    pub fn vec_mul(&self, v: &BitVec) -> Result<BitVec> {
        if v.len() != self.rows() {
            return Err(Error::invalid(format!(
                "vector of length {} times {}x{} matrix",
                v.len(),
                self.rows(),
                self.cols
            )));
        }
        let mut acc = BitVec::zeros(self.cols);
        for k in v.ones() {
            acc.xor_assign(&self.rows[k]);
        }
        Ok(acc)
    }

    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows() != other.rows() || self.cols != other.cols {
            return Err(Error::invalid("shape mismatch in matrix sum"));
        }
        let mut out = self.clone();
        for (a, b) in out.rows.iter_mut().zip(&other.rows) {
            a.xor_assign(b);
        }
        Ok(out)
    }

    pub fn kron(&self, other: &BitMatrix) -> BitMatrix {
        let (ra, ca) = (self.rows(), self.cols);
        let (rb, cb) = (other.rows(), other.cols);
        let mut out = BitMatrix::zeros(ra * rb, ca * cb);
        for i in 0..ra {
            for j in self.rows[i].ones() {
                for k in 0..rb {
                    for l in other.rows[k].ones() {
                        out.set(i * rb + k, j * cb + l, true);
                    }
                }
            }
        }
        out
    }

    /// `base^⊗n`; `n = 0` gives the 1×1 identity.
    pub fn kron_power(base: &BitMatrix, n: u32) -> BitMatrix {
        (0..n).fold(BitMatrix::identity(1), |acc, _| acc.kron(base))
    }

    /// Dense `G = G₂^⊗n_exp`, refused above [`MAX_DENSE_EXP`].
    pub fn polar(n_exp: u32) -> Result<BitMatrix> {
        if n_exp > MAX_DENSE_EXP {
            return Err(Error::invalid(format!(
                "dense polar matrix limited to n_exp <= {MAX_DENSE_EXP}, got {n_exp}"
            )));
        }
        Ok(Self::kron_power(&Self::kernel(), n_exp))
    }

    /// Keeps only the listed columns, in the order given. Equivalent to
    /// right-multiplying by the corresponding selection matrix.
    pub fn project_columns(&self, idx: &[usize]) -> Result<BitMatrix> {
        if let Some(&bad) = idx.iter().find(|&&c| c >= self.cols) {
            return Err(Error::invalid(format!(
                "column {bad} out of range for {} columns",
                self.cols
            )));
        }
        Ok(BitMatrix {
            rows: self.rows.iter().map(|r| r.select(idx)).collect(),
            cols: idx.len(),
        })
    }

    /// Selection matrix with a one at `(idx[k], k)`; shape `n × idx.len()`.
    pub fn selection(n: usize, idx: &[usize]) -> Result<BitMatrix> {
        let mut m = BitMatrix::zeros(n, idx.len());
        for (k, &i) in idx.iter().enumerate() {
            if i >= n {
                return Err(Error::invalid(format!("index {i} out of range for {n}")));
            }
            m.set(i, k, true);
        }
        Ok(m)
    }

    /// Number of nonzero entries, `‖M‖₀`.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BitVec::count_ones).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(BitVec::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.rows() == self.cols
            && self
                .rows
                .iter()
                .enumerate()
                .all(|(i, r)| r.count_ones() == 1 && r.get(i))
    }

    /// Coordinates of all ones, row-major.
    pub fn ones(&self) -> Vec<(usize, usize)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.ones().map(move |c| (r, c)))
            .collect()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows(), self.cols)?;
        for row in &self.rows {
            for b in row.iter() {
                write!(f, "{}", u8::from(b))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Unpacked `Vec<Vec<u8>>` reference arithmetic for differential tests.
pub mod reference {
    pub type Dense = Vec<Vec<u8>>;

    pub fn mat_mul(a: &Dense, b: &Dense) -> Dense {
        let inner = b.len();
        let cols = b.first().map_or(0, Vec::len);
        a.iter()
            .map(|row| {
                assert_eq!(row.len(), inner);
                (0..cols)
                    .map(|c| (0..inner).fold(0u8, |acc, k| acc ^ (row[k] & b[k][c])))
                    .collect()
            })
            .collect()
    }

    pub fn vec_mul(v: &[u8], m: &Dense) -> Vec<u8> {
        mat_mul(&vec![v.to_vec()], m).remove(0)
    }

    pub fn kron(a: &Dense, b: &Dense) -> Dense {
        let (ra, ca) = (a.len(), a[0].len());
        let (rb, cb) = (b.len(), b[0].len());
        let mut out = vec![vec![0u8; ca * cb]; ra * rb];
        for i in 0..ra {
            for j in 0..ca {
                for k in 0..rb {
                    for l in 0..cb {
                        out[i * rb + k][j * cb + l] = a[i][j] & b[k][l];
                    }
                }
            }
        }
        out
    }

    pub fn polar(n_exp: u32) -> Dense {
        let g2 = vec![vec![1, 0], vec![1, 1]];
        (0..n_exp).fold(vec![vec![1u8]], |acc, _| kron(&acc, &g2))
    }

    pub fn transpose(a: &Dense) -> Dense {
        let cols = a.first().map_or(0, Vec::len);
        (0..cols).map(|c| a.iter().map(|r| r[c]).collect()).collect()
    }
}
