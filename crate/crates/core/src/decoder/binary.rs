//! Classical successive-cancellation decoding of polar codes, plus the
//! classical syndrome decoder built on it.
//!
//! LLRs are natural-log ratios `ln P(0)/P(1)`.

use crate::bitmatrix::{polar_transform_in_place, BitVec};
use crate::code::CodeSpec;
use crate::error::{Error, Result};

/// Exact check-node update `2·atanh(tanh(a/2)·tanh(b/2))`.
pub fn check_node(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        return a.signum() * b.signum() * f64::INFINITY;
    }
    let sign = a.signum() * b.signum();
    let m = a.abs().min(b.abs());
    let corr = (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p();
    let out = sign * m + corr;
    if out.is_nan() {
        0.0
    } else {
        out
    }
}

/// Variable-node update given the decided upper bit `u`.
pub fn variable_node(a: f64, b: f64, u: u8) -> f64 {
    let out = if u == 0 { b + a } else { b - a };
    if out.is_nan() {
        0.0
    } else {
        out
    }
}

/// Hard decision: `0` iff the LLR is strictly positive.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    u8::from(llr.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater))
}

/// Branch metric `log₂(1 + 2^{−λ·(−1)^u})`.
pub fn branch_metric(llr: f64, u: u8) -> f64 {
    let x = if u == 0 { -llr } else { llr };
    if x == f64::INFINITY {
        return f64::INFINITY;
    }
    if x > 0.0 {
        x + (-x).exp2().ln_1p() / std::f64::consts::LN_2
    } else {
        x.exp2().ln_1p() / std::f64::consts::LN_2
    }
}

/// Per-path state of the LLR tree: `llr[λ]` has `N >> λ` entries and
/// `upper[λ]` holds decided upper-branch values at layer `λ`.
#[derive(Clone)]
struct Tree {
    llr: Vec<Vec<f64>>,
    upper: Vec<Vec<u8>>,
}

impl Tree {
    fn new(channel: &[f64], n_exp: u32) -> Self {
        let n = channel.len();
        let mut llr = vec![channel.to_vec()];
        let mut upper = vec![Vec::new()];
        for l in 1..=n_exp {
            llr.push(vec![0.0; n >> l]);
            upper.push(vec![0; n >> l]);
        }
        Self { llr, upper }
    }

    /// Leaf LLR of index `i`; earlier indices must be decided.
    fn leaf(&mut self, i: usize, n_exp: u32) -> f64 {
        let n = n_exp as usize;
        let start = if i == 0 {
            1
        } else {
            let l = n - i.trailing_zeros() as usize;
            let size = 1usize << (n - l);
            let (lo, hi) = self.llr.split_at_mut(l);
            let prev = &lo[l - 1];
            for b in 0..size {
                hi[0][b] = variable_node(prev[b], prev[b + size], self.upper[l][b]);
            }
            l + 1
        };
        for l in start..=n {
            let size = 1usize << (n - l);
            let (lo, hi) = self.llr.split_at_mut(l);
            let prev = &lo[l - 1];
            for b in 0..size {
                hi[0][b] = check_node(prev[b], prev[b + size]);
            }
        }
        self.llr[n][0]
    }

    /// Records the decision at index `i` and re-encodes completed subtrees.
    fn decide(&mut self, i: usize, value: u8, n_exp: u32) {
        let n = n_exp as usize;
        let mut vals = vec![value];
        for l in (1..=n).rev() {
            if (i >> (n - l)) & 1 == 0 {
                self.upper[l] = vals;
                return;
            }
            let size = vals.len();
            let mut parent = vec![0u8; 2 * size];
            for b in 0..size {
                parent[b] = self.upper[l][b] ^ vals[b];
                parent[b + size] = vals[b];
            }
            vals = parent;
        }
    }
}

fn check_inputs(llrs: &[f64], spec: &CodeSpec, frozen_vals: &BitVec) -> Result<()> {
    if llrs.len() != spec.n() {
        return Err(Error::invalid(format!(
            "expected {} LLRs, got {}",
            spec.n(),
            llrs.len()
        )));
    }
    let nf = spec.n() - spec.k();
    if frozen_vals.len() != nf {
        return Err(Error::invalid(format!(
            "expected {nf} frozen values, got {}",
            frozen_vals.len()
        )));
    }
    Ok(())
}

/// Frozen value at each index, `None` for information indices.
fn frozen_table(spec: &CodeSpec, frozen_vals: &BitVec) -> Vec<Option<u8>> {
    let mut table = vec![None; spec.n()];
    for (k, f) in spec.frozen_set().into_iter().enumerate() {
        table[f] = Some(u8::from(frozen_vals.get(k)));
    }
    table
}

/// Successive-cancellation decoding; frozen indices take `frozen_vals`
/// (listed in ascending index order).
pub fn binary_sc_decode(llrs: &[f64], spec: &CodeSpec, frozen_vals: &BitVec) -> Result<BitVec> {
    check_inputs(llrs, spec, frozen_vals)?;
    let frozen = frozen_table(spec, frozen_vals);
    let n_exp = spec.n_exp();
    let mut tree = Tree::new(llrs, n_exp);
    let mut u = vec![0u8; spec.n()];
    for i in 0..spec.n() {
        let llr = tree.leaf(i, n_exp);
        u[i] = frozen[i].unwrap_or_else(|| hard_decision(llr));
        tree.decide(i, u[i], n_exp);
    }
    Ok(BitVec::from_bits(&u))
}

struct BinaryPath {
    tree: Tree,
    u: Vec<u8>,
    pm: f64,
}

/// Successive-cancellation list decoding. Returns the lowest-metric path
/// and its metric; ties go to the earliest-created path, and the hard
/// decision is always created first so `list_size = 1` reproduces
/// [`binary_sc_decode`].
pub fn binary_scl_decode(
    llrs: &[f64],
    spec: &CodeSpec,
    frozen_vals: &BitVec,
    list_size: usize,
) -> Result<(BitVec, f64)> {
    check_inputs(llrs, spec, frozen_vals)?;
    if list_size == 0 {
        return Err(Error::invalid("list size must be at least 1"));
    }
    let frozen = frozen_table(spec, frozen_vals);
    let n_exp = spec.n_exp();
    let mut paths = vec![BinaryPath {
        tree: Tree::new(llrs, n_exp),
        u: Vec::with_capacity(spec.n()),
        pm: 0.0,
    }];
    for i in 0..spec.n() {
        let leaves: Vec<f64> = paths.iter_mut().map(|p| p.tree.leaf(i, n_exp)).collect();
        if let Some(v) = frozen[i] {
            for (p, &llr) in paths.iter_mut().zip(&leaves) {
                p.pm += branch_metric(llr, v);
                p.u.push(v);
                p.tree.decide(i, v, n_exp);
            }
            continue;
        }
        let mut cands: Vec<(f64, usize, u8)> = Vec::with_capacity(2 * paths.len());
        for (k, (p, &llr)) in paths.iter().zip(&leaves).enumerate() {
            let first = hard_decision(llr);
            for v in [first, first ^ 1] {
                cands.push((p.pm + branch_metric(llr, v), k, v));
            }
        }
        let order = survivors(&cands, list_size);
        let mut next = Vec::with_capacity(order.len());
        for c in order {
            let (pm, k, v) = cands[c];
            let parent = &paths[k];
            let mut child = BinaryPath {
                tree: parent.tree.clone(),
                u: parent.u.clone(),
                pm,
            };
            child.u.push(v);
            child.tree.decide(i, v, n_exp);
            next.push(child);
        }
        paths = next;
    }
    let best = paths
        .iter()
        .enumerate()
        .min_by(|(ka, a), (kb, b)| a.pm.total_cmp(&b.pm).then(ka.cmp(kb)))
        .map(|(k, _)| k)
        .expect("list is never empty");
    Ok((BitVec::from_bits(&paths[best].u), paths[best].pm))
}

/// Indices of the `limit` lowest-metric candidates (ties by position), in
/// their original order.
pub(crate) fn survivors<T>(cands: &[(f64, usize, T)], limit: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..cands.len()).filter(|&c| !cands[c].0.is_nan()).collect();
    if idx.len() > limit {
        idx.sort_by(|&a, &b| cands[a].0.total_cmp(&cands[b].0).then(a.cmp(&b)));
        idx.truncate(limit);
        idx.sort_unstable();
    }
    idx
}

/// Classical syndrome decoding over BSC(`p`): the decoder sees no channel
/// output, so every LLR is `ln((1−p)/p)` and the frozen values are the
/// measured syndrome `(nG)_ℱ`. Returns the noise estimate `ŝG`.
pub fn binary_syndrome_decode(syndrome: &BitVec, spec: &CodeSpec, p: f64, list_size: usize) -> Result<BitVec> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("p must lie in (0, 1), got {p}")));
    }
    let llrs = vec![((1.0 - p) / p).ln(); spec.n()];
    let (s, _) = binary_scl_decode(&llrs, spec, syndrome, list_size)?;
    let mut bits = s.to_bits();
    polar_transform_in_place(&mut bits);
    Ok(BitVec::from_bits(&bits))
}

/// Syndrome `(nG)_ℱ` of classical noise `n`.
pub fn binary_syndrome(noise: &BitVec, spec: &CodeSpec) -> Result<BitVec> {
    if noise.len() != spec.n() {
        return Err(Error::invalid("noise length does not match N"));
    }
    let mut bits = noise.to_bits();
    polar_transform_in_place(&mut bits);
    Ok(BitVec::from_bits(&bits).select(&spec.frozen_set()))
}
