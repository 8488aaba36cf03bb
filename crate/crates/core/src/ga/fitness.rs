//! Monte Carlo fitness with common random numbers.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::channel::ChannelParam;
use crate::code::QuantumCode;
use crate::decoder::QuantumDecoder;
use crate::montecarlo::count_failures;

/// Scores codes by logical error rate on one fixed set of trials, so every
/// candidate sees the same noise realizations. Results are cached per code.
#[derive(Debug)]
pub struct Evaluator {
    param: ChannelParam,
    list_size: usize,
    trials: u64,
    seed: u64,
    cache: HashMap<QuantumCode, f64>,
    evaluations: u64,
}

impl Evaluator {
    pub fn new(param: ChannelParam, list_size: usize, trials: u64, seed: u64) -> Self {
        Self {
            param,
            list_size,
            trials,
            seed,
            cache: HashMap::new(),
            evaluations: 0,
        }
    }

    /// Number of uncached evaluations performed.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    fn score(&self, code: &QuantumCode) -> f64 {
        let decoder = QuantumDecoder::new(code, self.param, self.list_size).expect("list size checked by config");
        count_failures(&decoder, self.param, self.seed, 0, self.trials) as f64 / self.trials as f64
    }

    pub fn fitness(&mut self, code: &QuantumCode) -> f64 {
        self.fitness_many(std::slice::from_ref(code))[0]
    }

    /// Scores a batch, evaluating uncached codes in parallel.
    pub fn fitness_many(&mut self, codes: &[QuantumCode]) -> Vec<f64> {
        let mut todo: Vec<&QuantumCode> = Vec::new();
        for c in codes {
            if !self.cache.contains_key(c) && !todo.contains(&c) {
                todo.push(c);
            }
        }
        let scores: Vec<f64> = todo.par_iter().map(|c| self.score(c)).collect();
        self.evaluations += todo.len() as u64;
        for (c, s) in todo.into_iter().zip(scores) {
            self.cache.insert(c.clone(), s);
        }
        codes.iter().map(|c| self.cache[c]).collect()
    }
}
