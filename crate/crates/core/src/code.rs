//! Quantum precoded polar codes: information sets, precoders and the CSS
//! validity constraints that tie them together.
//!
//! A code is the pair `(𝒜, T)`. `𝒜` is the information set of the Z-code;
//! the X-code uses the reversed set `J·𝒜`, so the CSS condition reduces to
//! "no pair `(i, N−1−i)` is frozen on both sides". `T` is a rate-1,
//! upper-unitriangular precoder that must be an involution and persymmetric
//! (`Tᵀ = JTJ`).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bitmatrix::{BitMatrix, MAX_DENSE_EXP};
use crate::error::{Error, Result};

/// Largest supported stage count.
pub const MAX_N_EXP: u32 = 20;

/// Blocklength, information set and derived frozen set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CodeSpec {
    n_exp: u32,
    info_set: Vec<usize>,
    info_mask: Vec<bool>,
}

impl CodeSpec {
    /// `info_set` may be given in any order; duplicates and out-of-range
    /// indices are rejected.
    pub fn new(n_exp: u32, info_set: impl IntoIterator<Item = usize>) -> Result<Self> {
        if n_exp == 0 || n_exp > MAX_N_EXP {
            return Err(Error::invalid(format!(
                "n_exp must be in 1..={MAX_N_EXP}, got {n_exp}"
            )));
        }
        let n = 1usize << n_exp;
        let mut info_mask = vec![false; n];
        let mut info: Vec<usize> = Vec::new();
        for i in info_set {
            if i >= n {
                return Err(Error::invalid(format!("info index {i} out of range for N={n}")));
            }
            if info_mask[i] {
                return Err(Error::invalid(format!("duplicate info index {i}")));
            }
            info_mask[i] = true;
            info.push(i);
        }
        info.sort_unstable();
        Ok(Self {
            n_exp,
            info_set: info,
            info_mask,
        })
    }

    pub fn n_exp(&self) -> u32 {
        self.n_exp
    }

    pub fn n(&self) -> usize {
        1 << self.n_exp
    }

    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    #[inline]
    pub fn is_info(&self, i: usize) -> bool {
        self.info_mask[i]
    }

    pub fn frozen_set(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.info_mask[i]).collect()
    }

    /// The reversed frozen set `J·ℱ` used by the X-code, ascending.
    pub fn reversed_frozen_set(&self) -> Vec<usize> {
        let n = self.n();
        let mut v: Vec<usize> = self.frozen_set().into_iter().map(|f| n - 1 - f).collect();
        v.sort_unstable();
        v
    }

    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.n() - 1 - i
    }
}

impl fmt::Debug for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CodeSpec")
            .field("n_exp", &self.n_exp)
            .field("info_set", &self.info_set)
            .finish()
    }
}

/// Upper-unitriangular F2 matrix stored as its off-diagonal support.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Precoder {
    n: usize,
    off_diag: BTreeSet<(usize, usize)>,
}

impl Precoder {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            off_diag: BTreeSet::new(),
        }
    }

    /// Every entry must satisfy `i < j < n`.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut off_diag = BTreeSet::new();
        for (i, j) in entries {
            if j >= n || i >= j {
                return Err(Error::invalid(format!(
                    "off-diagonal entry ({i},{j}) must satisfy i < j < {n}"
                )));
            }
            if !off_diag.insert((i, j)) {
                return Err(Error::invalid(format!("duplicate entry ({i},{j})")));
            }
        }
        Ok(Self { n, off_diag })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn off_diag(&self) -> &BTreeSet<(usize, usize)> {
        &self.off_diag
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.off_diag.contains(&(i, j))
    }

    pub fn is_identity(&self) -> bool {
        self.off_diag.is_empty()
    }

    /// Flips one off-diagonal entry.
    pub fn toggle(&mut self, i: usize, j: usize) {
        assert!(i < j && j < self.n, "entry ({i},{j}) is not strictly upper");
        if !self.off_diag.remove(&(i, j)) {
            self.off_diag.insert((i, j));
        }
    }

    pub fn remove(&mut self, i: usize, j: usize) -> bool {
        self.off_diag.remove(&(i, j))
    }

    /// `‖T‖₀`, diagonal included.
    pub fn nnz(&self) -> usize {
        self.n + self.off_diag.len()
    }

    /// Persymmetric partner of an entry: `(i, j) ↦ (N−1−j, N−1−i)`.
    #[inline]
    pub fn mirror_of(&self, (i, j): (usize, usize)) -> (usize, usize) {
        (self.n - 1 - j, self.n - 1 - i)
    }

    pub fn to_dense(&self) -> BitMatrix {
        let mut m = BitMatrix::identity(self.n);
        for &(i, j) in &self.off_diag {
            m.set(i, j, true);
        }
        m
    }

    /// For every column `i`, the rows `j < i` with `T[j][i] = 1`.
    pub fn column_support(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.n];
        for &(i, j) in &self.off_diag {
            cols[j].push(i);
        }
        cols
    }

    /// Applies `s ↦ s·T` to per-index symbols; XOR acts componentwise, so
    /// two-bit Pauli symbols are precoded on their X and Z parts at once.
    pub fn apply(&self, s: &mut [u8]) {
        assert_eq!(s.len(), self.n);
        // entries only feed later columns, so walking columns from the end
        // reads unmodified sources
        let cols = self.column_support();
        for i in (0..self.n).rev() {
            for &j in &cols[i] {
                s[i] ^= s[j];
            }
        }
    }

    /// Nonzero off-diagonal entries of `T² + I`, i.e. of `E²` where `E` is
    /// the strictly-upper part. Empty iff `T` is an involution.
    pub fn involution_defects(&self) -> Vec<(usize, usize)> {
        let mut rows: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(i, j) in &self.off_diag {
            rows.entry(i).or_default().push(j);
        }
        let mut parity: BTreeMap<(usize, usize), bool> = BTreeMap::new();
        for &(a, b) in &self.off_diag {
            if let Some(next) = rows.get(&b) {
                for &c in next {
                    *parity.entry((a, c)).or_insert(false) ^= true;
                }
            }
        }
        parity.into_iter().filter(|&(_, odd)| odd).map(|(k, _)| k).collect()
    }

    pub fn is_involution(&self) -> bool {
        self.involution_defects().is_empty()
    }

    /// Nonzero entries of `TJTᵀJ + I`, computed sparsely as
    /// `E + M + E·M` with `M = JEᵀJ` the mirrored support.
    pub fn persymmetric_product_defects(&self) -> Vec<(usize, usize)> {
        let mirrored: BTreeSet<(usize, usize)> =
            self.off_diag.iter().map(|&e| self.mirror_of(e)).collect();
        let mut rows_m: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(i, j) in &mirrored {
            rows_m.entry(i).or_default().push(j);
        }
        let mut parity: BTreeMap<(usize, usize), bool> = BTreeMap::new();
        for &e in self.off_diag.iter().chain(mirrored.iter()) {
            *parity.entry(e).or_insert(false) ^= true;
        }
        for &(a, b) in &self.off_diag {
            if let Some(next) = rows_m.get(&b) {
                for &c in next {
                    *parity.entry((a, c)).or_insert(false) ^= true;
                }
            }
        }
        parity.into_iter().filter(|&(_, odd)| odd).map(|(k, _)| k).collect()
    }

    /// Entries whose persymmetric partner is absent.
    pub fn mirror_orphans(&self) -> Vec<(usize, usize)> {
        self.off_diag
            .iter()
            .copied()
            .filter(|&e| !self.off_diag.contains(&self.mirror_of(e)))
            .collect()
    }
}

impl fmt::Debug for Precoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Precoder")
            .field("n", &self.n)
            .field("off_diag", &self.off_diag)
            .finish()
    }
}

/// An entry `(i, j)` may be nonzero when `i` is information and `j` frozen,
/// or when it is the persymmetric mirror of such an entry.
pub fn sparsity_allows(spec: &CodeSpec, (i, j): (usize, usize)) -> bool {
    let n = spec.n();
    let base = |a: usize, b: usize| spec.is_info(a) && !spec.is_info(b);
    base(i, j) || base(n - 1 - j, n - 1 - i)
}

/// One failed structural check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Both members of the pair `(i, N−1−i)` are frozen.
    BothFrozen { pair: (usize, usize) },
    /// `T² ≠ I`; lists the nonzero entries of `T² + I`.
    NotInvolution { entries: Vec<(usize, usize)> },
    /// `TJTᵀJ ≠ I`; lists the nonzero entries of `TJTᵀJ + I`.
    PersymmetricProduct { entries: Vec<(usize, usize)> },
    /// Entry present without its persymmetric partner.
    MirrorMissing { entry: (usize, usize), mirror: (usize, usize) },
    /// Entry not allowed by the information-row / frozen-column rule.
    Sparsity { entry: (usize, usize) },
    /// `H_X·H_Zᵀ + H_Z·H_Xᵀ` is nonzero in this many entries.
    Symplectic { nonzero: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BothFrozen { pair } => {
                write!(f, "pair ({}, {}) is frozen on both sides", pair.0, pair.1)
            }
            Violation::NotInvolution { entries } => {
                write!(f, "T is not an involution: T^2 + I nonzero at {entries:?}")
            }
            Violation::PersymmetricProduct { entries } => {
                write!(f, "T J T^T J != I: nonzero at {entries:?}")
            }
            Violation::MirrorMissing { entry, mirror } => write!(
                f,
                "entry ({}, {}) lacks its mirror ({}, {})",
                entry.0, entry.1, mirror.0, mirror.1
            ),
            Violation::Sparsity { entry } => write!(
                f,
                "entry ({}, {}) is neither info-row x frozen-column nor the mirror of one",
                entry.0, entry.1
            ),
            Violation::Symplectic { nonzero } => {
                write!(f, "symplectic product has {nonzero} nonzero entries")
            }
        }
    }
}

/// Result of a validation; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn extend(&mut self, other: ValidityReport) {
        self.violations.extend(other.violations);
    }

    fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(self.to_string()))
        }
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks that no pair `(i, N−1−i)` is frozen on both sides (`FᵀJF = 0`).
pub fn validate_css(spec: &CodeSpec) -> ValidityReport {
    let n = spec.n();
    let violations = (0..n / 2)
        .filter(|&i| !spec.is_info(i) && !spec.is_info(n - 1 - i))
        .map(|i| Violation::BothFrozen { pair: (i, n - 1 - i) })
        .collect();
    ValidityReport { violations }
}

/// Checks involution, `TJTᵀJ = I`, mirror closure and the sparsity rule,
/// reporting each failure separately.
pub fn validate_precoder(t: &Precoder, spec: &CodeSpec) -> Result<ValidityReport> {
    if t.n() != spec.n() {
        return Err(Error::invalid(format!(
            "precoder size {} does not match N={}",
            t.n(),
            spec.n()
        )));
    }
    let mut report = ValidityReport::default();
    let defects = t.involution_defects();
    if !defects.is_empty() {
        report.violations.push(Violation::NotInvolution { entries: defects });
    }
    let defects = t.persymmetric_product_defects();
    if !defects.is_empty() {
        report
            .violations
            .push(Violation::PersymmetricProduct { entries: defects });
    }
    for entry in t.mirror_orphans() {
        report.violations.push(Violation::MirrorMissing {
            entry,
            mirror: t.mirror_of(entry),
        });
    }
    for &entry in t.off_diag() {
        if !sparsity_allows(spec, entry) {
            report.violations.push(Violation::Sparsity { entry });
        }
    }
    Ok(report)
}

/// Valid iff `H_X·H_Zᵀ + H_Z·H_Xᵀ = 0` over F2.
pub fn symplectic_check(hx: &BitMatrix, hz: &BitMatrix) -> Result<ValidityReport> {
    if hx.rows() != hz.rows() || hx.cols() != hz.cols() {
        return Err(Error::invalid(format!(
            "H_X is {}x{} but H_Z is {}x{}",
            hx.rows(),
            hx.cols(),
            hz.rows(),
            hz.cols()
        )));
    }
    let a = hx.mat_mul(&hz.transpose())?;
    let b = hz.mat_mul(&hx.transpose())?;
    let nonzero = a.add(&b)?.nnz();
    let mut report = ValidityReport::default();
    if nonzero > 0 {
        report.violations.push(Violation::Symplectic { nonzero });
    }
    Ok(report)
}

/// Dense parity checks `(H̃_X, H̃_Z) = (F_XᵀTG, F_ZᵀTᵀGᵀ)`.
pub fn parity_checks(spec: &CodeSpec, t: &Precoder) -> Result<(BitMatrix, BitMatrix)> {
    if spec.n_exp() > MAX_DENSE_EXP {
        return Err(Error::invalid("dense parity checks limited to N <= 4096"));
    }
    let g = BitMatrix::polar(spec.n_exp())?;
    let tg = t.to_dense().mat_mul(&g)?;
    // rows of F_XᵀTG are the rows of TG indexed by J·ℱ
    let fx = spec.reversed_frozen_set();
    let hx = BitMatrix::from_bitvec_rows(fx.iter().map(|&i| tg.row(i).clone()).collect(), spec.n())?;
    // F_ZᵀTᵀGᵀ = (G·T·F_Z)ᵀ
    let gtf = g.mat_mul(&t.to_dense())?.project_columns(&spec.frozen_set())?;
    Ok((hx, gtf.transpose()))
}

/// Stacks the CSS parity checks into a stabilizer `[H_X | H_Z]` with
/// `H_X = [0; H̃_X]`, `H_Z = [H̃_Z; 0]` and runs [`symplectic_check`].
pub fn audit_css(spec: &CodeSpec, t: &Precoder) -> Result<ValidityReport> {
    let (hx_t, hz_t) = parity_checks(spec, t)?;
    let n = spec.n();
    let (rz, rx) = (hz_t.rows(), hx_t.rows());
    let mut hx_rows = vec![crate::bitmatrix::BitVec::zeros(n); rz];
    hx_rows.extend((0..rx).map(|r| hx_t.row(r).clone()));
    let mut hz_rows: Vec<_> = (0..rz).map(|r| hz_t.row(r).clone()).collect();
    hz_rows.extend(std::iter::repeat_n(crate::bitmatrix::BitVec::zeros(n), rx));
    symplectic_check(
        &BitMatrix::from_bitvec_rows(hx_rows, n)?,
        &BitMatrix::from_bitvec_rows(hz_rows, n)?,
    )
}

/// Splits `𝒜` into logical indices (`i` and `N−1−i` both information) and
/// stabilizer indices.
pub fn derive_logicals(spec: &CodeSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    let report = validate_css(spec);
    if !report.is_valid() {
        return Err(Error::Validation(format!("CSS constraint violated: {report}")));
    }
    Ok(spec
        .info_set()
        .iter()
        .partition(|&&i| spec.is_info(spec.mirror(i))))
}

/// Natural-log Bhattacharyya parameters of the bit-channels of a BSC with
/// crossover `eps`. Smaller means more reliable.
pub fn log_bhattacharyya(n_exp: u32, eps: f64) -> Vec<f64> {
    let n = 1usize << n_exp;
    let ln_z0 = (2.0 * (eps * (1.0 - eps)).sqrt()).ln();
    (0..n)
        .map(|i| {
            let mut ln_z = ln_z0;
            for stage in (0..n_exp).rev() {
                if (i >> stage) & 1 == 1 {
                    ln_z *= 2.0;
                } else {
                    // ln(2z − z²) = ln z + ln(2 − z)
                    ln_z += (2.0 - ln_z.exp()).ln();
                }
            }
            ln_z
        })
        .collect()
}

/// Indices sorted from most to least reliable for depolarizing noise `p`:
/// bit-channels of BSC(2p/3), ties broken by lower index first.
pub fn reliability_order(n_exp: u32, p: f64) -> Vec<usize> {
    let z = log_bhattacharyya(n_exp, 2.0 * p / 3.0);
    let mut order: Vec<usize> = (0..z.len()).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    order
}

/// Reliability-seeded CSS-valid information set with `K = N/2 + 1`.
///
/// The logical pair is the pair whose weaker member is most reliable; every
/// other pair contributes its more reliable member.
pub fn initial_info_set(n_exp: u32, p: f64) -> Result<CodeSpec> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::invalid(format!("p must lie in (0, 0.5), got {p}")));
    }
    if n_exp == 0 || n_exp > MAX_N_EXP {
        return Err(Error::invalid(format!("n_exp must be in 1..={MAX_N_EXP}")));
    }
    let n = 1usize << n_exp;
    let order = reliability_order(n_exp, p);
    let mut rank = vec![0usize; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let logical = (0..n / 2)
        .min_by_key(|&i| (rank[i].max(rank[n - 1 - i]), i))
        .expect("n >= 2");
    let mut info = Vec::with_capacity(n / 2 + 1);
    for i in 0..n / 2 {
        let j = n - 1 - i;
        if i == logical {
            info.extend([i, j]);
        } else if rank[i] < rank[j] {
            info.push(i);
        } else {
            info.push(j);
        }
    }
    CodeSpec::new(n_exp, info)
}

/// A validated quantum precoded polar code.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QuantumCode {
    spec: CodeSpec,
    precoder: Precoder,
    logical_set: Vec<usize>,
    stabilizer_set: Vec<usize>,
}

impl QuantumCode {
    /// Runs every structural check; fails with [`Error::Validation`].
    pub fn new(spec: CodeSpec, precoder: Precoder) -> Result<Self> {
        let mut report = validate_css(&spec);
        report.extend(validate_precoder(&precoder, &spec)?);
        report.into_result()?;
        let (logical_set, stabilizer_set) = derive_logicals(&spec)?;
        Ok(Self {
            spec,
            precoder,
            logical_set,
            stabilizer_set,
        })
    }

    /// Unprecoded code (`T = I`).
    pub fn unprecoded(spec: CodeSpec) -> Result<Self> {
        let n = spec.n();
        Self::new(spec, Precoder::identity(n))
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    pub fn precoder(&self) -> &Precoder {
        &self.precoder
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn logical_set(&self) -> &[usize] {
        &self.logical_set
    }

    pub fn stabilizer_set(&self) -> &[usize] {
        &self.stabilizer_set
    }

    pub fn into_parts(self) -> (CodeSpec, Precoder) {
        (self.spec, self.precoder)
    }
}

/// On-disk code description (JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeFile {
    pub n_exp: u32,
    pub info_set: Vec<usize>,
    pub precoder_offdiag: Vec<[usize; 2]>,
    #[serde(default)]
    pub meta: BTreeMap<String, serde_json::Value>,
}

impl CodeFile {
    pub fn from_parts(spec: &CodeSpec, t: &Precoder, meta: BTreeMap<String, serde_json::Value>) -> Self {
        Self {
            n_exp: spec.n_exp(),
            info_set: spec.info_set().to_vec(),
            precoder_offdiag: t.off_diag().iter().map(|&(i, j)| [i, j]).collect(),
            meta,
        }
    }

    pub fn from_code(code: &QuantumCode, meta: BTreeMap<String, serde_json::Value>) -> Self {
        Self::from_parts(code.spec(), code.precoder(), meta)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<document>".to_string() } else { path };
            Error::parse(field, e.into_inner().to_string())
        })
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("code file serializes");
        s.push('\n');
        s
    }

    /// Structural decoding into a spec and a precoder. CSS and precoder
    /// constraints are not checked here.
    pub fn to_parts(&self) -> Result<(CodeSpec, Precoder)> {
        if self.info_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parse("info_set", "must be strictly increasing"));
        }
        let spec = CodeSpec::new(self.n_exp, self.info_set.iter().copied())
            .map_err(|e| Error::parse("info_set", e.to_string()))?;
        let t = Precoder::from_entries(spec.n(), self.precoder_offdiag.iter().map(|&[i, j]| (i, j)))
            .map_err(|e| Error::parse("precoder_offdiag", e.to_string()))?;
        Ok((spec, t))
    }

    pub fn to_code(&self) -> Result<QuantumCode> {
        let (spec, t) = self.to_parts()?;
        QuantumCode::new(spec, t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}
