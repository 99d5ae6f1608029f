//! Population metaheuristics over a common minimization objective.
//!
//! Each engine consumes a [`RngStream`] in a fixed order, so a given
//! `(seed, config, objective)` always produces the same [`RunTrace`]
//! regardless of the [`Execution`] schedule.

mod ga;
mod pso;
mod sos;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Execution, Result};

pub use ga::{ga_run, roulette_select, uniform_crossover, uniform_mutate, GaConfig};
pub use pso::{position_update, pso_run, velocity_update, PsoConfig};
pub use sos::{
    commensal_offspring, commensalism_step, mutualism_offspring, mutualism_step,
    parasitism_step, sos_run, sos_run_with, SosConfig,
};

/// A minimization problem. `evaluate` must be deterministic; lower is
/// better.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;
    fn evaluate(&self, x: &[f64]) -> f64;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (**self).evaluate(x)
    }
}

/// `f(x) = sum x_i^2`, minimum 0 at the origin.
#[derive(Debug, Clone, Copy)]
pub struct Sphere {
    pub dimension: usize,
}

impl Objective for Sphere {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }
}

/// Wraps a closure as an [`Objective`].
pub struct FnObjective<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        FnObjective { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Seeded random stream. ChaCha8 keeps draws identical across platforms.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `[low, high)`.
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        low + (high - low) * self.unit()
    }

    /// Uniform on the open interval `(-1, 1)`.
    pub fn symmetric(&mut self) -> f64 {
        loop {
            let v = 2.0 * self.unit() - 1.0;
            if v > -1.0 {
                return v;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    /// Uniform index in `0..n` other than `exclude`. Needs `n >= 2`.
    pub fn index_excluding(&mut self, n: usize, exclude: usize) -> usize {
        debug_assert!(n >= 2 && exclude < n);
        let k = self.index(n - 1);
        if k >= exclude {
            k + 1
        } else {
            k
        }
    }

    /// SOS benefit factor, 1 or 2 with equal probability.
    pub fn benefit_factor(&mut self) -> f64 {
        if self.rng.random::<bool>() {
            2.0
        } else {
            1.0
        }
    }
}

/// Derives the seed of sub-stream `index` from a master seed (SplitMix64
/// finalizer over both inputs).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index))
}

/// A candidate solution and its cached fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub genes: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Candidate {
    pub fn new(genes: Vec<f64>) -> Self {
        Candidate {
            genes,
            fitness: None,
        }
    }

    pub(crate) fn scored(genes: Vec<f64>, fitness: f64) -> Self {
        Candidate {
            genes,
            fitness: Some(fitness),
        }
    }

    /// Fitness, or `+inf` when unset.
    pub fn score(&self) -> f64 {
        self.fitness.unwrap_or(f64::INFINITY)
    }
}

/// `size` candidates with genes i.i.d. uniform on `[low, high)`.
pub fn random_population(
    size: usize,
    dimension: usize,
    low: f64,
    high: f64,
    rng: &mut RngStream,
) -> Result<Vec<Candidate>> {
    if size == 0 {
        return Err(Error::InvalidConfig("population size must be at least 1".into()));
    }
    if !(low < high) {
        return Err(Error::InvalidConfig(format!(
            "init range [{low}, {high}) is empty"
        )));
    }
    Ok((0..size)
        .map(|_| Candidate::new((0..dimension).map(|_| rng.uniform(low, high)).collect()))
        .collect())
}

/// Result of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub best_genes: Vec<f64>,
    pub best_fitness: f64,
    /// Best-so-far fitness after initialization (index 0) and after each
    /// iteration.
    pub history: Vec<f64>,
    pub evaluation_count: u64,
    /// Population size recorded after initialization and each iteration.
    pub population_sizes: Vec<usize>,
}

/// Counts evaluations and rejects non-finite or negative fitness.
pub(crate) struct Evaluator<'a, O: ?Sized> {
    objective: &'a O,
    pub(crate) count: u64,
}

impl<'a, O: Objective + ?Sized> Evaluator<'a, O> {
    pub(crate) fn new(objective: &'a O) -> Self {
        Evaluator {
            objective,
            count: 0,
        }
    }

    fn checked(&self, value: f64) -> Result<f64> {
        if value.is_finite() && value >= 0.0 {
            Ok(value)
        } else {
            Err(Error::NonFiniteFitness {
                value,
                evaluations: self.count,
            })
        }
    }

    pub(crate) fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.count += 1;
        self.checked(self.objective.evaluate(x))
    }

    /// Evaluates a batch whose contents are already fixed.
    pub(crate) fn eval_batch(&mut self, xs: &[Vec<f64>], exec: Execution) -> Result<Vec<f64>> {
        let objective = self.objective;
        let values = exec.map(xs, |x| objective.evaluate(x));
        let start = self.count;
        for (k, v) in values.iter().enumerate() {
            self.count = start + k as u64 + 1;
            self.checked(*v)?;
        }
        Ok(values)
    }

    pub(crate) fn score_all(
        &mut self,
        population: &mut [Candidate],
        exec: Execution,
    ) -> Result<()> {
        let genes: Vec<Vec<f64>> = population.iter().map(|c| c.genes.clone()).collect();
        let values = self.eval_batch(&genes, exec)?;
        for (c, v) in population.iter_mut().zip(values) {
            c.fitness = Some(v);
        }
        Ok(())
    }
}

/// Index of the lowest fitness; ties go to the lowest index.
pub(crate) fn best_index(population: &[Candidate]) -> usize {
    let mut best = 0;
    for (i, c) in population.iter().enumerate().skip(1) {
        if c.score() < population[best].score() {
            best = i;
        }
    }
    best
}

pub(crate) fn check_dimension<O: Objective + ?Sized>(objective: &O) -> Result<usize> {
    match objective.dimension() {
        0 => Err(Error::InvalidConfig("objective dimension must be at least 1".into())),
        d => Ok(d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_draws() {
        let mut rng = RngStream::new(5);
        let pop = random_population(30, 34, 0.0, 1.0, &mut rng).unwrap();
        assert_eq!(pop.len(), 30);
        assert!(pop
            .iter()
            .all(|c| c.genes.len() == 34 && c.fitness.is_none()
                && c.genes.iter().all(|g| (0.0..1.0).contains(g))));
        let again = random_population(30, 34, 0.0, 1.0, &mut RngStream::new(5)).unwrap();
        assert_eq!(pop, again);
        assert!(random_population(0, 34, 0.0, 1.0, &mut rng).is_err());
        assert!(random_population(3, 34, 1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn stream_helpers() {
        let mut rng = RngStream::new(1);
        for _ in 0..10_000 {
            let s = rng.symmetric();
            assert!(s > -1.0 && s < 1.0);
            let j = rng.index_excluding(5, 2);
            assert!(j < 5 && j != 2);
            let bf = rng.benefit_factor();
            assert!(bf == 1.0 || bf == 2.0);
        }
        assert_ne!(derive_seed(42, 0), derive_seed(42, 1));
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
    }

    #[test]
    fn evaluator_rejects_nan() {
        let f = FnObjective::new(1, |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { x[0] });
        let mut ev = Evaluator::new(&f);
        assert_eq!(ev.eval(&[0.25]).unwrap(), 0.25);
        assert!(matches!(
            ev.eval(&[0.75]),
            Err(Error::NonFiniteFitness { evaluations: 2, .. })
        ));
    }
}
