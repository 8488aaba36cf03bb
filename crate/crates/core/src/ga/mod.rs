//! Joint genetic search over information sets and precoders.
//!
//! The search runs in three phases: evolve information sets with `T = I`,
//! evolve a precoder for each resulting set, then repeatedly refine an
//! elite pair either in `T` or in `𝒜` (re-fitting the precoder rows that
//! the new set introduces) and keep the best `P` pairs.

mod fitness;
mod genome;

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use fitness::Evaluator;
pub use genome::{
    candidate_groups, crossover_sets, mutate_precoder, mutate_set, orbit, repair_precoder, toggle_group,
    ForcedSets, PairRole, SetGenome,
};

use crate::channel::ChannelParam;
use crate::code::{validate_precoder, CodeSpec, Precoder, QuantumCode, MAX_N_EXP};
use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

fn default_generations() -> usize {
    4
}

fn default_set_rate() -> f64 {
    0.05
}

fn default_t_rate() -> f64 {
    0.01
}

/// Search parameters, read from a JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaConfig {
    pub version: u32,
    pub n_exp: u32,
    /// Depolarizing probability used for fitness and reliability ordering.
    pub p: f64,
    pub list_size: usize,
    /// `P`: pairs retained between outer iterations.
    pub population_size: usize,
    /// `C`: offspring per generation.
    pub offspring_count: usize,
    /// `O`: outer refinement iterations.
    pub outer_iters: usize,
    /// Generations per inner set or precoder search.
    #[serde(default = "default_generations")]
    pub generations: usize,
    pub fitness_trials: u64,
    /// Explicit forced sets; when both are absent a reliability-based
    /// default is derived from the seed.
    #[serde(default)]
    pub forced_info: Option<Vec<usize>>,
    #[serde(default)]
    pub forced_frozen: Option<Vec<usize>>,
    /// Per-pair probability of resampling a pair role.
    #[serde(default = "default_set_rate")]
    pub set_mutation_rate: f64,
    /// Per-orbit probability of toggling a precoder entry group.
    #[serde(default = "default_t_rate")]
    pub t_flip_rate: f64,
    pub seed: u64,
    /// Starting code; defaults to the reliability construction.
    #[serde(default)]
    pub seed_code: Option<PathBuf>,
}

impl GaConfig {
    /// A configuration with default rates and no seed code.
    pub fn new(n_exp: u32, p: f64, list_size: usize, population_size: usize, offspring_count: usize, outer_iters: usize, fitness_trials: u64, seed: u64) -> Self {
        Self {
            version: CONFIG_VERSION,
            n_exp,
            p,
            list_size,
            population_size,
            offspring_count,
            outer_iters,
            generations: default_generations(),
            fitness_trials,
            forced_info: None,
            forced_frozen: None,
            set_mutation_rate: default_set_rate(),
            t_flip_rate: default_t_rate(),
            seed,
            seed_code: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<document>".to_string() } else { path };
            Error::parse(field, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::parse(field, msg));
        if self.version != CONFIG_VERSION {
            return bad("version", format!("unsupported version {}, expected {CONFIG_VERSION}", self.version));
        }
        if self.n_exp == 0 || self.n_exp > MAX_N_EXP {
            return bad("n_exp", format!("must be in 1..={MAX_N_EXP}"));
        }
        if !(self.p > 0.0 && self.p < 0.5) {
            return bad("p", "must lie in (0, 0.5)".into());
        }
        if self.list_size == 0 {
            return bad("list_size", "must be at least 1".into());
        }
        if self.population_size == 0 {
            return bad("population_size", "must be at least 1".into());
        }
        if self.fitness_trials == 0 {
            return bad("fitness_trials", "must be at least 1".into());
        }
        for (name, r) in [("set_mutation_rate", self.set_mutation_rate), ("t_flip_rate", self.t_flip_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return bad(name, "must lie in [0, 1]".into());
            }
        }
        Ok(())
    }

    fn param(&self) -> ChannelParam {
        ChannelParam::new(self.p).expect("validated")
    }
}

/// A scored code.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub code: QuantumCode,
    /// Logical error rate on the common fitness trials.
    pub fitness: f64,
    pub eval_trials: u64,
}

/// One line of the generation log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub phase: String,
    pub outer: usize,
    pub generation: usize,
    pub best_fitness: f64,
    pub population: usize,
    pub population_digest: String,
    pub evaluations: u64,
}

/// FNV-1a over the canonical contents of each code, in population order.
fn digest<'a>(codes: impl Iterator<Item = &'a QuantumCode>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for c in codes {
        for &i in c.spec().info_set() {
            eat(i as u64);
        }
        eat(u64::MAX);
        for &(i, j) in c.precoder().off_diag() {
            eat(i as u64);
            eat(j as u64);
        }
        eat(u64::MAX - 1);
    }
    format!("{h:016x}")
}

type LogSink<'a> = Box<dyn FnMut(&GenerationRecord) + 'a>;

/// Search state: configuration, forced sets, RNG, fitness cache and log.
pub struct Optimizer<'a> {
    cfg: GaConfig,
    seed_spec: CodeSpec,
    forced: ForcedSets,
    rng: ChaCha8Rng,
    evaluator: Evaluator,
    sink: Option<LogSink<'a>>,
    phase: String,
    outer: usize,
}

impl<'a> Optimizer<'a> {
    /// Resolves forced sets against `seed_spec` and checks feasibility.
    pub fn new(cfg: GaConfig, seed_spec: CodeSpec) -> Result<Self> {
        cfg.validate()?;
        if seed_spec.n_exp() != cfg.n_exp {
            return Err(Error::invalid(format!(
                "seed code has n_exp={} but the config says {}",
                seed_spec.n_exp(),
                cfg.n_exp
            )));
        }
        let genome = SetGenome::from_spec(&seed_spec)?;
        let forced = if cfg.forced_info.is_none() && cfg.forced_frozen.is_none() {
            ForcedSets::default_for(&seed_spec, cfg.p)
        } else {
            ForcedSets::new(
                cfg.n_exp,
                cfg.forced_info.clone().unwrap_or_default(),
                cfg.forced_frozen.clone().unwrap_or_default(),
            )?
        };
        forced.check_feasible(seed_spec.n(), genome.logical_count())?;
        if !forced.admits(&seed_spec) {
            return Err(Error::invalid("seed information set conflicts with the forced sets"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        // keep the search stream apart from the fitness trial streams
        rng.set_stream(u64::MAX);
        let evaluator = Evaluator::new(cfg.param(), cfg.list_size, cfg.fitness_trials, cfg.seed);
        Ok(Self {
            cfg,
            seed_spec,
            forced,
            rng,
            evaluator,
            sink: None,
            phase: String::new(),
            outer: 0,
        })
    }

    /// Receives one record per generation.
    pub fn with_log(mut self, sink: impl FnMut(&GenerationRecord) + 'a) -> Self {
        self.sink = Some(Box::new(sink));
        self
    }

    pub fn forced(&self) -> &ForcedSets {
        &self.forced
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    fn emit(&mut self, generation: usize, pool: &[(QuantumCode, f64)]) {
        for (c, _) in pool {
            debug_assert!(crate::code::validate_css(c.spec()).is_valid());
            debug_assert!(validate_precoder(c.precoder(), c.spec()).unwrap().is_valid());
        }
        let Some(sink) = self.sink.as_mut() else { return };
        let record = GenerationRecord {
            phase: self.phase.clone(),
            outer: self.outer,
            generation,
            best_fitness: pool.first().map_or(f64::NAN, |e| e.1),
            population: pool.len(),
            population_digest: digest(pool.iter().map(|e| &e.0)),
            evaluations: self.evaluator.evaluations(),
        };
        sink(&record);
    }

    /// Binary tournament on a population sorted by fitness.
    fn tournament(&mut self, len: usize) -> usize {
        let a = self.rng.random_range(0..len);
        let b = self.rng.random_range(0..len);
        a.min(b)
    }

    /// Merges, drops duplicate codes (first kept), stable-sorts by fitness
    /// and keeps the best `limit`.
    fn retain<T: Clone>(items: Vec<(T, QuantumCode, f64)>, limit: usize) -> Vec<(T, QuantumCode, f64)> {
        let mut seen = std::collections::HashSet::new();
        let mut out: Vec<_> = items.into_iter().filter(|e| seen.insert(e.1.clone())).collect();
        out.sort_by(|a, b| a.2.total_cmp(&b.2));
        out.truncate(limit);
        out
    }

    fn code_for(spec: &CodeSpec, t: &Precoder) -> QuantumCode {
        QuantumCode::new(spec.clone(), repair_precoder(t, spec)).expect("repaired precoder is valid")
    }

    /// Evolves information sets with `t` held fixed (repaired per set).
    /// Returns the final population, best first.
    pub fn set_ga(&mut self, seed_spec: &CodeSpec, t: &Precoder) -> Result<Vec<(CodeSpec, f64)>> {
        let g0 = SetGenome::from_spec(seed_spec)?;
        if !self.forced.admits(seed_spec) {
            return Err(Error::invalid("seed information set conflicts with the forced sets"));
        }
        let code0 = Self::code_for(seed_spec, t);
        let f0 = self.evaluator.fitness(&code0);
        let mut pop = vec![(g0, code0, f0)];
        let (gens, offspring) = (self.cfg.generations, self.cfg.offspring_count);
        for gen in 0..gens {
            if offspring == 0 {
                break;
            }
            let mut children = Vec::with_capacity(offspring);
            for _ in 0..offspring {
                let a = self.tournament(pop.len());
                let base = if pop.len() >= 2 && self.rng.random_bool(0.5) {
                    let b = self.tournament(pop.len());
                    crossover_sets(&pop[a].0, &pop[b].0, &self.forced, &mut self.rng)
                } else {
                    pop[a].0.clone()
                };
                children.push(mutate_set(&base, &self.forced, self.cfg.set_mutation_rate, &mut self.rng));
            }
            let codes: Vec<QuantumCode> = children.iter().map(|g| Self::code_for(&g.to_spec(), t)).collect();
            let fits = self.evaluator.fitness_many(&codes);
            let mut merged = pop;
            merged.extend(children.into_iter().zip(codes).zip(fits).map(|((g, c), f)| (g, c, f)));
            pop = Self::retain(merged, self.cfg.population_size);
            let view: Vec<(QuantumCode, f64)> = pop.iter().map(|e| (e.1.clone(), e.2)).collect();
            self.emit(gen, &view);
        }
        Ok(pop.into_iter().map(|(g, _, f)| (g.to_spec(), f)).collect())
    }

    /// Evolves the precoder for a fixed set, restricted to orbits whose
    /// base row lies in `focus` when given. Returns the best precoder.
    pub fn t_ga(&mut self, spec: &CodeSpec, t0: &Precoder, focus: Option<&BTreeSet<usize>>) -> Result<(Precoder, f64)> {
        self.t_ga_budget(spec, t0, focus, self.cfg.generations, self.cfg.offspring_count)
    }

    fn t_ga_budget(
        &mut self,
        spec: &CodeSpec,
        t0: &Precoder,
        focus: Option<&BTreeSet<usize>>,
        gens: usize,
        offspring: usize,
    ) -> Result<(Precoder, f64)> {
        let report = validate_precoder(t0, spec)?;
        if !report.is_valid() {
            return Err(Error::invalid(format!("starting precoder is invalid: {report}")));
        }
        let code0 = QuantumCode::new(spec.clone(), t0.clone())?;
        let f0 = self.evaluator.fitness(&code0);
        let groups = candidate_groups(spec, focus);
        let mut pop = vec![(t0.clone(), code0, f0)];
        if groups.is_empty() {
            return Ok((t0.clone(), f0));
        }
        for gen in 0..gens {
            if offspring == 0 {
                break;
            }
            let mut children = Vec::with_capacity(offspring);
            for _ in 0..offspring {
                let a = self.tournament(pop.len());
                children.push(mutate_precoder(&pop[a].0, &groups, self.cfg.t_flip_rate, &mut self.rng));
            }
            let codes: Vec<QuantumCode> = children
                .iter()
                .map(|t| QuantumCode::new(spec.clone(), t.clone()).expect("mutation preserves validity"))
                .collect();
            let fits = self.evaluator.fitness_many(&codes);
            let mut merged = pop;
            merged.extend(children.into_iter().zip(codes).zip(fits).map(|((t, c), f)| (t, c, f)));
            pop = Self::retain(merged, self.cfg.population_size);
            let view: Vec<(QuantumCode, f64)> = pop.iter().map(|e| (e.1.clone(), e.2)).collect();
            self.emit(gen, &view);
        }
        let (t, _, f) = pop.swap_remove(0);
        Ok((t, f))
    }

    /// Repairs `t_elite` for `spec_new`, then runs a half-budget precoder
    /// search over the rows `𝒜_new \ 𝒜_elite`.
    pub fn row_ga(&mut self, spec_elite: &CodeSpec, t_elite: &Precoder, spec_new: &CodeSpec) -> Result<(Precoder, f64)> {
        let repaired = repair_precoder(t_elite, spec_new);
        let focus: BTreeSet<usize> = spec_new
            .info_set()
            .iter()
            .copied()
            .filter(|&i| !spec_elite.is_info(i))
            .collect();
        let half = |x: usize| if x == 0 { 0 } else { (x / 2).max(1) };
        self.t_ga_budget(
            spec_new,
            &repaired,
            Some(&focus),
            half(self.cfg.generations),
            half(self.cfg.offspring_count),
        )
    }

    /// Runs the full three-phase search from the seed.
    pub fn joint_optimize(&mut self) -> Result<Candidate> {
        let seed = self.seed_spec.clone();
        let n = seed.n();
        let limit = self.cfg.population_size;

        self.phase = "sets".into();
        let specs = self.set_ga(&seed, &Precoder::identity(n))?;

        self.phase = "precoders".into();
        let mut pool: Vec<((), QuantumCode, f64)> = Vec::new();
        for (spec, _) in &specs {
            let (t, f) = self.t_ga(spec, &Precoder::identity(n), None)?;
            pool.push(((), QuantumCode::new(spec.clone(), t)?, f));
        }
        pool = Self::retain(pool, limit);
        self.emit_pool(0, &pool);

        for o in 0..self.cfg.outer_iters {
            self.outer = o + 1;
            let top = limit.div_ceil(4).min(pool.len());
            let elite = pool[self.rng.random_range(0..top)].1.clone();
            if self.rng.random_bool(0.5) {
                self.phase = "refine_t".into();
                let (t, f) = self.t_ga(elite.spec(), elite.precoder(), None)?;
                pool.push(((), QuantumCode::new(elite.spec().clone(), t)?, f));
            } else {
                self.phase = "refine_set".into();
                let specs = self.set_ga(elite.spec(), elite.precoder())?;
                self.phase = "refine_rows".into();
                for (spec, _) in specs {
                    let kept = Self::code_for(&spec, elite.precoder());
                    let f = self.evaluator.fitness(&kept);
                    pool.push(((), kept, f));
                    let (t, f) = self.row_ga(elite.spec(), elite.precoder(), &spec)?;
                    pool.push(((), QuantumCode::new(spec, t)?, f));
                }
            }
            pool = Self::retain(pool, limit);
            self.phase = "retain".into();
            self.emit_pool(0, &pool);
        }
        let (_, code, fitness) = pool.swap_remove(0);
        Ok(Candidate {
            code,
            fitness,
            eval_trials: self.cfg.fitness_trials,
        })
    }

    fn emit_pool(&mut self, generation: usize, pool: &[((), QuantumCode, f64)]) {
        let view: Vec<(QuantumCode, f64)> = pool.iter().map(|e| (e.1.clone(), e.2)).collect();
        self.emit(generation, &view);
    }
}

/// Evolves information sets for a fixed precoder; best first.
pub fn set_ga(seed_spec: &CodeSpec, t: &Precoder, cfg: &GaConfig) -> Result<Vec<CodeSpec>> {
    let mut opt = Optimizer::new(cfg.clone(), seed_spec.clone())?;
    Ok(opt.set_ga(seed_spec, t)?.into_iter().map(|(s, _)| s).collect())
}

/// Evolves the precoder of a fixed information set.
pub fn t_ga(spec: &CodeSpec, t0: &Precoder, cfg: &GaConfig) -> Result<Precoder> {
    let mut opt = Optimizer::new(cfg.clone(), spec.clone())?;
    Ok(opt.t_ga(spec, t0, None)?.0)
}

/// Adapts an elite precoder to a new information set.
pub fn row_ga(spec_elite: &CodeSpec, t_elite: &Precoder, spec_new: &CodeSpec, cfg: &GaConfig) -> Result<Precoder> {
    let mut opt = Optimizer::new(cfg.clone(), spec_new.clone())?;
    Ok(opt.row_ga(spec_elite, t_elite, spec_new)?.0)
}

/// Full search from `seed_spec`.
pub fn joint_optimize(cfg: &GaConfig, seed_spec: &CodeSpec) -> Result<Candidate> {
    Optimizer::new(cfg.clone(), seed_spec.clone())?.joint_optimize()
}
