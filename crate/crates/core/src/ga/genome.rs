//! Search-space encodings and constraint-preserving variation operators.
//!
//! Information sets are encoded per mirror pair `(k, N−1−k)`, which makes
//! the CSS condition hold by construction. Precoders are varied by toggling
//! mirror orbits `{(i, j), (N−1−j, N−1−i)}` of allowed entries, rejecting
//! toggles that break the involution.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::code::{reliability_order, sparsity_allows, validate_css, CodeSpec, Precoder};
use crate::error::{Error, Result};

/// Role of the pair `(k, N−1−k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairRole {
    /// Both members are information indices.
    Logical,
    /// Only `k` is information.
    Left,
    /// Only `N−1−k` is information.
    Right,
}

const ROLES: [PairRole; 3] = [PairRole::Logical, PairRole::Left, PairRole::Right];

/// One role per mirror pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SetGenome {
    n_exp: u32,
    roles: Vec<PairRole>,
}

impl SetGenome {
    /// Fails if the spec is not CSS-valid.
    pub fn from_spec(spec: &CodeSpec) -> Result<Self> {
        let report = validate_css(spec);
        if !report.is_valid() {
            return Err(Error::invalid(format!("seed information set is not CSS-valid: {report}")));
        }
        let n = spec.n();
        let roles = (0..n / 2)
            .map(|k| match (spec.is_info(k), spec.is_info(n - 1 - k)) {
                (true, true) => PairRole::Logical,
                (true, false) => PairRole::Left,
                _ => PairRole::Right,
            })
            .collect();
        Ok(Self {
            n_exp: spec.n_exp(),
            roles,
        })
    }

    pub fn to_spec(&self) -> CodeSpec {
        let n = 1usize << self.n_exp;
        let mut info = Vec::with_capacity(n / 2 + 1);
        for (k, r) in self.roles.iter().enumerate() {
            match r {
                PairRole::Logical => info.extend([k, n - 1 - k]),
                PairRole::Left => info.push(k),
                PairRole::Right => info.push(n - 1 - k),
            }
        }
        CodeSpec::new(self.n_exp, info).expect("pair encoding yields a valid set")
    }

    pub fn roles(&self) -> &[PairRole] {
        &self.roles
    }

    pub fn logical_count(&self) -> usize {
        self.roles.iter().filter(|&&r| r == PairRole::Logical).count()
    }
}

/// Indices pinned to information or frozen during the search.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForcedSets {
    pub info: BTreeSet<usize>,
    pub frozen: BTreeSet<usize>,
}

impl ForcedSets {
    /// Validates ranges and disjointness. Forcing `i` frozen also forces
    /// `N−1−i` to be information.
    pub fn new(n_exp: u32, info: impl IntoIterator<Item = usize>, frozen: impl IntoIterator<Item = usize>) -> Result<Self> {
        let n = 1usize << n_exp;
        let mut info: BTreeSet<usize> = info.into_iter().collect();
        let frozen: BTreeSet<usize> = frozen.into_iter().collect();
        if let Some(&i) = info.iter().chain(&frozen).find(|&&i| i >= n) {
            return Err(Error::invalid(format!("forced index {i} out of range for N={n}")));
        }
        if let Some(i) = info.intersection(&frozen).next() {
            return Err(Error::invalid(format!("index {i} is forced both info and frozen")));
        }
        for &f in &frozen {
            let m = n - 1 - f;
            if frozen.contains(&m) {
                return Err(Error::invalid(format!(
                    "forcing both {f} and {m} frozen violates the CSS constraint"
                )));
            }
            info.insert(m);
        }
        Ok(Self { info, frozen })
    }

    /// Reliability-driven default: walking indices from most to least
    /// reliable, pin up to `N/8` indices that are information in `seed`
    /// with a frozen mirror, and freeze their mirrors.
    pub fn default_for(seed: &CodeSpec, p: f64) -> Self {
        let n = seed.n();
        let mut info = BTreeSet::new();
        let mut frozen = BTreeSet::new();
        for i in reliability_order(seed.n_exp(), p) {
            if info.len() >= n / 8 {
                break;
            }
            let m = n - 1 - i;
            if seed.is_info(i) && !seed.is_info(m) {
                info.insert(i);
                frozen.insert(m);
            }
        }
        Self { info, frozen }
    }

    /// Roles allowed for pair `k`.
    pub fn allowed_roles(&self, n: usize, k: usize) -> Vec<PairRole> {
        let (a, b) = (k, n - 1 - k);
        ROLES
            .into_iter()
            .filter(|r| {
                let (ia, ib) = match r {
                    PairRole::Logical => (true, true),
                    PairRole::Left => (true, false),
                    PairRole::Right => (false, true),
                };
                !(self.info.contains(&a) && !ia)
                    && !(self.info.contains(&b) && !ib)
                    && !(self.frozen.contains(&a) && ia)
                    && !(self.frozen.contains(&b) && ib)
            })
            .collect()
    }

    pub fn admits(&self, spec: &CodeSpec) -> bool {
        self.info.iter().all(|&i| i < spec.n() && spec.is_info(i))
            && self.frozen.iter().all(|&i| i < spec.n() && !spec.is_info(i))
    }

    /// Checks that a genome with `logical` logical pairs can exist.
    pub fn check_feasible(&self, n: usize, logical: usize) -> Result<()> {
        let mut must = 0;
        let mut may = 0;
        for k in 0..n / 2 {
            let roles = self.allowed_roles(n, k);
            if roles.is_empty() {
                return Err(Error::invalid(format!("no admissible role for pair ({k}, {})", n - 1 - k)));
            }
            if roles.contains(&PairRole::Logical) {
                may += 1;
                if roles.len() == 1 {
                    must += 1;
                }
            }
        }
        if must > logical || may < logical {
            return Err(Error::invalid(format!(
                "forced sets admit between {must} and {may} logical pairs, need {logical}"
            )));
        }
        Ok(())
    }
}

fn pick<R: Rng + ?Sized, T: Copy>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

/// Restores the number of logical pairs to `target`, preferring to change
/// pairs outside `keep`.
fn repair_logical_count<R: Rng + ?Sized>(
    g: &mut SetGenome,
    target: usize,
    forced: &ForcedSets,
    keep: &BTreeSet<usize>,
    rng: &mut R,
) {
    let n = 1usize << g.n_exp;
    loop {
        let count = g.logical_count();
        if count == target {
            return;
        }
        let want_more = count < target;
        let movable = |k: usize, g: &SetGenome| {
            let roles = forced.allowed_roles(n, k);
            if want_more {
                g.roles[k] != PairRole::Logical && roles.contains(&PairRole::Logical)
            } else {
                g.roles[k] == PairRole::Logical && roles.iter().any(|&r| r != PairRole::Logical)
            }
        };
        let mut cands: Vec<usize> = (0..n / 2).filter(|&k| !keep.contains(&k) && movable(k, g)).collect();
        if cands.is_empty() {
            cands = (0..n / 2).filter(|&k| movable(k, g)).collect();
        }
        assert!(!cands.is_empty(), "feasibility was checked up front");
        let k = pick(rng, &cands);
        g.roles[k] = if want_more {
            PairRole::Logical
        } else {
            let roles: Vec<PairRole> = forced
                .allowed_roles(n, k)
                .into_iter()
                .filter(|&r| r != PairRole::Logical)
                .collect();
            pick(rng, &roles)
        };
    }
}

/// Resamples the role of each free pair with probability `rate` (at least
/// one pair changes when any pair is free), then restores the logical-pair
/// count.
pub fn mutate_set<R: Rng + ?Sized>(g: &SetGenome, forced: &ForcedSets, rate: f64, rng: &mut R) -> SetGenome {
    let n = 1usize << g.n_exp;
    let target = g.logical_count();
    let free: Vec<usize> = (0..n / 2).filter(|&k| forced.allowed_roles(n, k).len() > 1).collect();
    let mut out = g.clone();
    if free.is_empty() {
        return out;
    }
    let mut chosen: BTreeSet<usize> = free.iter().copied().filter(|_| rng.random_bool(rate)).collect();
    if chosen.is_empty() {
        chosen.insert(pick(rng, &free));
    }
    for &k in &chosen {
        let roles: Vec<PairRole> = forced
            .allowed_roles(n, k)
            .into_iter()
            .filter(|&r| r != out.roles[k])
            .collect();
        out.roles[k] = pick(rng, &roles);
    }
    repair_logical_count(&mut out, target, forced, &chosen, rng);
    out
}

/// Uniform per-pair crossover followed by logical-count repair.
pub fn crossover_sets<R: Rng + ?Sized>(a: &SetGenome, b: &SetGenome, forced: &ForcedSets, rng: &mut R) -> SetGenome {
    assert_eq!(a.n_exp, b.n_exp);
    let roles = a
        .roles
        .iter()
        .zip(&b.roles)
        .map(|(&x, &y)| if rng.random_bool(0.5) { x } else { y })
        .collect();
    let mut child = SetGenome { n_exp: a.n_exp, roles };
    repair_logical_count(&mut child, a.logical_count(), forced, &BTreeSet::new(), rng);
    child
}

/// Mirror orbit of one entry, ascending.
pub fn orbit(n: usize, (i, j): (usize, usize)) -> Vec<(usize, usize)> {
    let m = (n - 1 - j, n - 1 - i);
    if m == (i, j) {
        vec![(i, j)]
    } else {
        let mut v = vec![(i, j), m];
        v.sort_unstable();
        v
    }
}

/// Orbits of entries `(i, j)` with `i` information, `j` frozen and `i < j`,
/// optionally restricted to rows in `focus`. Sorted and duplicate-free.
pub fn candidate_groups(spec: &CodeSpec, focus: Option<&BTreeSet<usize>>) -> Vec<Vec<(usize, usize)>> {
    let n = spec.n();
    let frozen = spec.frozen_set();
    let mut groups = BTreeSet::new();
    for &i in spec.info_set() {
        if focus.is_some_and(|f| !f.contains(&i)) {
            continue;
        }
        for &j in frozen.iter().filter(|&&j| j > i) {
            groups.insert(orbit(n, (i, j)));
        }
    }
    groups.into_iter().collect()
}

/// Flips every entry of `group`; applying it twice is the identity.
pub fn toggle_group(t: &mut Precoder, group: &[(usize, usize)]) {
    for &(i, j) in group {
        t.toggle(i, j);
    }
}

/// Toggles each group with probability `rate` (at least one attempt),
/// rejecting and resampling toggles that break the involution. Starting
/// from a valid precoder the result is valid.
pub fn mutate_precoder<R: Rng + ?Sized>(
    t: &Precoder,
    groups: &[Vec<(usize, usize)>],
    rate: f64,
    rng: &mut R,
) -> Precoder {
    let mut out = t.clone();
    if groups.is_empty() {
        return out;
    }
    let mut toggles = groups.iter().filter(|_| rng.random_bool(rate)).count();
    if toggles == 0 {
        toggles = 1;
    }
    const ATTEMPTS: usize = 16;
    for _ in 0..toggles {
        for _ in 0..ATTEMPTS {
            let g = &groups[rng.random_range(0..groups.len())];
            toggle_group(&mut out, g);
            if out.is_involution() {
                break;
            }
            toggle_group(&mut out, g);
        }
    }
    out
}

/// Makes `t` valid for `spec`: drops orbits with an entry the sparsity rule
/// rejects, then drops orbits along involution defects until `T² = I`.
pub fn repair_precoder(t: &Precoder, spec: &CodeSpec) -> Precoder {
    let n = spec.n();
    let mut out = Precoder::identity(n);
    for &e in t.off_diag() {
        if orbit(n, e).iter().all(|&x| t.contains(x.0, x.1) && sparsity_allows(spec, x)) {
            out.toggle(e.0, e.1);
        }
    }
    loop {
        let defects = out.involution_defects();
        let Some(&(a, c)) = defects.first() else { break };
        let b = out
            .off_diag()
            .iter()
            .filter(|&&(r, _)| r == a)
            .map(|&(_, b)| b)
            .find(|&b| out.contains(b, c))
            .expect("a defect is witnessed by a two-step chain");
        for (i, j) in orbit(n, (b, c)) {
            out.remove(i, j);
        }
    }
    out
}
