//! Joint quaternary successive-cancellation list decoder.

use std::rc::Rc;

use super::quad::{butterfly_inputs, Quad};
use super::{noise_from_polarized, noise_from_symbols, SyndromePair};
use crate::channel::{prior_quad, ChannelParam, Pauli, PauliVec};
use crate::code::QuantumCode;
use crate::error::{Error, Result};

/// Relative slack under which two path metrics count as tied when picking
/// the final path.
const TIE_TOLERANCE: f64 = 1e-9;

/// Output of a decode.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumDecoding {
    /// Estimated physical noise.
    pub noise: PauliVec,
    /// Estimated source symbols `ŝ`.
    pub s_hat: Vec<Pauli>,
    /// Path metric `−ln P(noise)` accumulated along the path.
    pub pm: f64,
}

/// Reusable decoder bound to one code, channel and list size.
#[derive(Clone, Debug)]
pub struct QuantumDecoder {
    code: QuantumCode,
    n_exp: usize,
    list_size: usize,
    prior: Quad,
    /// `frozen_slot[i]` is the position of `i` inside the frozen set.
    frozen_slot: Vec<Option<usize>>,
    /// Rows `j < i` with `T[j][i] = 1`, per column `i`.
    columns: Vec<Vec<usize>>,
    precoded: bool,
}

#[derive(Clone)]
struct Path {
    /// `msgs[l]` has `N >> l` entries; index 0 is unused.
    msgs: Vec<Rc<Vec<Quad>>>,
    /// Decided upper-branch symbols per layer.
    upper: Vec<Rc<Vec<u8>>>,
    s: Vec<u8>,
    pm: f64,
}

impl QuantumDecoder {
    pub fn new(code: &QuantumCode, param: ChannelParam, list_size: usize) -> Result<Self> {
        Self::build(code, param, list_size, true)
    }

    /// Decoder for the code without its precoder (`r = s`), as used for
    /// plain quantum polar codes.
    pub fn unprecoded(code: &QuantumCode, param: ChannelParam, list_size: usize) -> Result<Self> {
        Self::build(code, param, list_size, false)
    }

    fn build(code: &QuantumCode, param: ChannelParam, list_size: usize, precoded: bool) -> Result<Self> {
        if list_size == 0 {
            return Err(Error::invalid("list size must be at least 1"));
        }
        let n = code.n();
        let mut frozen_slot = vec![None; n];
        for (k, f) in code.spec().frozen_set().into_iter().enumerate() {
            frozen_slot[f] = Some(k);
        }
        let columns = if precoded {
            code.precoder().column_support()
        } else {
            vec![Vec::new(); n]
        };
        Ok(Self {
            code: code.clone(),
            n_exp: code.spec().n_exp() as usize,
            list_size,
            prior: prior_quad(param),
            frozen_slot,
            columns,
            precoded,
        })
    }

    pub fn code(&self) -> &QuantumCode {
        &self.code
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    fn check_syndrome(&self, syndrome: &SyndromePair) -> Result<()> {
        let nf = self.code.n() - self.code.spec().k();
        if syndrome.sx.len() != nf || syndrome.sz.len() != nf {
            return Err(Error::invalid(format!(
                "syndrome lengths ({}, {}) do not match |F|={nf}",
                syndrome.sx.len(),
                syndrome.sz.len()
            )));
        }
        Ok(())
    }

    /// Precoder contribution `Σ_{j<i} s_j·T[j][i]` at index `i`.
    #[inline]
    fn carry(&self, i: usize, s: &[u8]) -> u8 {
        self.columns[i].iter().fold(0, |acc, &j| acc ^ s[j])
    }

    fn new_path(&self) -> Path {
        let n = 1usize << self.n_exp;
        let mut msgs = vec![Rc::new(Vec::new())];
        let mut upper = vec![Rc::new(Vec::new())];
        for l in 1..=self.n_exp {
            msgs.push(Rc::new(vec![Quad::uniform(); n >> l]));
            upper.push(Rc::new(vec![0; n >> l]));
        }
        Path {
            msgs,
            upper,
            s: Vec::with_capacity(n),
            pm: 0.0,
        }
    }

    /// Leaf message of index `i`, or `None` if the path became degenerate.
    fn leaf(&self, path: &mut Path, i: usize) -> Option<Quad> {
        let n = self.n_exp;
        let start = if i == 0 {
            1
        } else {
            let l = n - i.trailing_zeros() as usize;
            let size = 1usize << (n - l);
            let upper = Rc::clone(&path.upper[l]);
            if l == 1 {
                let cur = Rc::make_mut(&mut path.msgs[1]);
                for b in 0..size {
                    cur[b] = Quad::split(&self.prior, &self.prior, upper[b]).ok()?;
                }
            } else {
                let prev = Rc::clone(&path.msgs[l - 1]);
                let cur = Rc::make_mut(&mut path.msgs[l]);
                for b in 0..size {
                    cur[b] = Quad::split(&prev[b], &prev[b + size], upper[b]).ok()?;
                }
            }
            l + 1
        };
        for l in start..=n {
            let size = 1usize << (n - l);
            if l == 1 {
                let c = Quad::combine(&self.prior, &self.prior);
                Rc::make_mut(&mut path.msgs[1]).fill(c);
            } else {
                let prev = Rc::clone(&path.msgs[l - 1]);
                let cur = Rc::make_mut(&mut path.msgs[l]);
                for b in 0..size {
                    cur[b] = Quad::combine(&prev[b], &prev[b + size]);
                }
            }
        }
        Some(path.msgs[n][0])
    }

    /// Stores the decided `r_i` and re-encodes completed subtrees.
    fn decide(&self, path: &mut Path, i: usize, r: u8) {
        let n = self.n_exp;
        let mut vals = vec![r];
        for l in (1..=n).rev() {
            if (i >> (n - l)) & 1 == 0 {
                path.upper[l] = Rc::new(vals);
                return;
            }
            let upper = &path.upper[l];
            let size = vals.len();
            let mut parent = vec![0u8; 2 * size];
            for b in 0..size {
                let (a, c) = butterfly_inputs(upper[b], vals[b]);
                parent[b] = a;
                parent[b + size] = c;
            }
            vals = parent;
        }
    }

    /// List decoding. Paths are kept in the lexicographic order of their
    /// symbol prefixes (I < X < Z < Y); pruning keeps the `L` lowest
    /// metrics with ties going to the earlier path, and the returned path is
    /// the earliest one whose metric is within a relative `1e-9` of the
    /// minimum.
    pub fn decode(&self, syndrome: &SyndromePair) -> Result<QuantumDecoding> {
        self.check_syndrome(syndrome)?;
        let n = self.code.n();
        let mut paths = vec![self.new_path()];
        let mut cands: Vec<(f64, usize, u8)> = Vec::with_capacity(4 * self.list_size);
        let mut leaves: Vec<Option<Quad>> = Vec::with_capacity(self.list_size);
        for i in 0..n {
            leaves.clear();
            for p in paths.iter_mut() {
                leaves.push(self.leaf(p, i));
            }
            if let Some(k) = self.frozen_slot[i] {
                let sym = syndrome.symbol(k);
                let mut next = Vec::with_capacity(paths.len());
                for (mut p, leaf) in paths.drain(..).zip(&leaves) {
                    let Some(q) = leaf else { continue };
                    let r = sym ^ self.carry(i, &p.s);
                    let bm = -q.get(r).ln();
                    if !bm.is_finite() {
                        continue;
                    }
                    p.pm += bm;
                    p.s.push(sym);
                    self.decide(&mut p, i, r);
                    next.push(p);
                }
                paths = next;
            } else {
                cands.clear();
                for (k, (p, leaf)) in paths.iter().zip(&leaves).enumerate() {
                    let Some(q) = leaf else { continue };
                    let c = self.carry(i, &p.s);
                    for sym in 0..4u8 {
                        let bm = -q.get(sym ^ c).ln();
                        if bm.is_finite() {
                            cands.push((p.pm + bm, k, sym));
                        }
                    }
                }
                let keep = super::binary::survivors(&cands, self.list_size);
                let mut next = Vec::with_capacity(keep.len());
                for c in keep {
                    let (pm, k, sym) = cands[c];
                    let mut child = paths[k].clone();
                    let r = sym ^ self.carry(i, &child.s);
                    child.pm = pm;
                    child.s.push(sym);
                    self.decide(&mut child, i, r);
                    next.push(child);
                }
                paths = next;
            }
            if paths.is_empty() {
                return Err(Error::DecodeFailure);
            }
        }
        let best = select_best(paths.iter().map(|p| p.pm));
        self.finish(&paths[best].s, paths[best].pm)
    }

    fn finish(&self, s: &[u8], pm: f64) -> Result<QuantumDecoding> {
        let noise = if self.precoded {
            noise_from_symbols(s, &self.code)?
        } else {
            noise_from_polarized(s)
        };
        Ok(QuantumDecoding {
            noise,
            s_hat: s.iter().map(|&v| Pauli::from_symbol(v)).collect(),
            pm,
        })
    }

    /// Greedy successive cancellation, written recursively over sub-blocks.
    /// Serves as an independent reference for the list decoder at `L = 1`.
    pub fn decode_greedy(&self, syndrome: &SyndromePair) -> Result<QuantumDecoding> {
        self.check_syndrome(syndrome)?;
        let n = self.code.n();
        let leaves = vec![self.prior; n];
        let mut s = Vec::with_capacity(n);
        let mut pm = 0.0;
        self.greedy_block(&leaves, 0, syndrome, &mut s, &mut pm)?;
        self.finish(&s, pm)
    }

    fn greedy_block(
        &self,
        msgs: &[Quad],
        offset: usize,
        syndrome: &SyndromePair,
        s: &mut Vec<u8>,
        pm: &mut f64,
    ) -> Result<Vec<u8>> {
        if msgs.len() == 1 {
            let i = offset;
            let q = msgs[0];
            let c = self.carry(i, s);
            let sym = match self.frozen_slot[i] {
                Some(k) => syndrome.symbol(k),
                None => {
                    // same comparison as list pruning: lowest metric, first wins
                    let cost = |sym: u8| *pm - q.get(sym ^ c).ln();
                    let mut best = 0u8;
                    for sym in 1..4u8 {
                        if cost(sym) < cost(best) {
                            best = sym;
                        }
                    }
                    best
                }
            };
            let bm = -q.get(sym ^ c).ln();
            if !bm.is_finite() {
                return Err(Error::DecodeFailure);
            }
            *pm += bm;
            s.push(sym);
            return Ok(vec![sym ^ c]);
        }
        let half = msgs.len() / 2;
        let (a, b) = msgs.split_at(half);
        let up: Vec<Quad> = a.iter().zip(b).map(|(x, y)| Quad::combine(x, y)).collect();
        let left = self.greedy_block(&up, offset, syndrome, s, pm)?;
        let low = a
            .iter()
            .zip(b)
            .zip(&left)
            .map(|((x, y), &d)| Quad::split(x, y, d))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::DecodeFailure)?;
        let right = self.greedy_block(&low, offset + half, syndrome, s, pm)?;
        let mut out = vec![0u8; msgs.len()];
        for k in 0..half {
            let (x, y) = butterfly_inputs(left[k], right[k]);
            out[k] = x;
            out[k + half] = y;
        }
        Ok(out)
    }
}

/// Index of the earliest metric within the tie tolerance of the minimum.
pub(crate) fn select_best(pms: impl Iterator<Item = f64> + Clone) -> usize {
    let min = pms.clone().fold(f64::INFINITY, f64::min);
    let slack = TIE_TOLERANCE * (1.0 + min.abs());
    pms.into_iter()
        .position(|pm| pm <= min + slack)
        .expect("at least one finite metric")
}

/// One-shot form of [`QuantumDecoder::decode`].
pub fn quantum_scl_decode(
    syndrome: &SyndromePair,
    code: &QuantumCode,
    param: ChannelParam,
    list_size: usize,
) -> Result<QuantumDecoding> {
    QuantumDecoder::new(code, param, list_size)?.decode(syndrome)
}
