//! Generational GA: elitism, roulette selection, uniform crossover and
//! uniform mutation.
//!
//! Each generation the elite is carried over and `population` children are
//! bred, giving `population + elite_count` entries; the best `population`
//! of those survive. Offspring genes are drawn sequentially and then scored
//! as one batch, which is where the parallel schedule applies.

use serde::{Deserialize, Serialize};

use super::{best_index, check_dimension, random_population, Candidate, Evaluator, Objective, RngStream, RunTrace};
use crate::{Error, Execution, Result};

/// Keeps roulette weights finite at zero fitness.
const ROULETTE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub elite_count: usize,
    pub gene_low: f64,
    pub gene_high: f64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 30,
            generations: 1000,
            crossover_rate: 0.5,
            mutation_rate: 1.0 / 34.0,
            elite_count: 1,
            gene_low: 0.0,
            gene_high: 1.0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.population == 0 || self.generations == 0 {
            return bad("GA needs a nonempty population and at least one generation");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("GA rates must lie in [0, 1]");
        }
        if self.elite_count >= self.population {
            return bad("GA elite count must be below the population size");
        }
        if !(self.gene_low < self.gene_high) {
            return bad("GA gene range is empty");
        }
        Ok(())
    }
}

/// Fitness-proportional selection under minimization: weight
/// `1 / (fitness + 1e-9)`. Returns an index into `population`.
pub fn roulette_select(population: &[Candidate], rng: &mut RngStream) -> usize {
    assert!(!population.is_empty(), "roulette over an empty population");
    let total: f64 = population.iter().map(|c| 1.0 / (c.score() + ROULETTE_EPS)).sum();
    let mut spin = rng.unit() * total;
    for (i, c) in population.iter().enumerate() {
        spin -= 1.0 / (c.score() + ROULETTE_EPS);
        if spin < 0.0 {
            return i;
        }
    }
    population.len() - 1
}

/// Each gene comes from `a` with probability `rate`, otherwise from `b`.
pub fn uniform_crossover(a: &[f64], b: &[f64], rate: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(&x, &y)| if rng.bernoulli(rate) { x } else { y })
        .collect())
}

/// Redraws each gene from `[low, high)` with probability `rate`. Returns
/// the number of genes redrawn.
pub fn uniform_mutate(genes: &mut [f64], rate: f64, low: f64, high: f64, rng: &mut RngStream) -> usize {
    let mut hits = 0;
    for g in genes.iter_mut() {
        if rng.bernoulli(rate) {
            *g = rng.uniform(low, high);
            hits += 1;
        }
    }
    hits
}

pub fn ga_run<O: Objective + ?Sized>(
    objective: &O,
    config: &GaConfig,
    rng: &mut RngStream,
    exec: Execution,
) -> Result<RunTrace> {
    config.validate()?;
    let dim = check_dimension(objective)?;
    let cfg = config;

    let mut pop = random_population(cfg.population, dim, cfg.gene_low, cfg.gene_high, rng)?;
    let mut ev = Evaluator::new(objective);
    ev.score_all(&mut pop, exec)?;

    let mut history = Vec::with_capacity(cfg.generations + 1);
    let mut sizes = Vec::with_capacity(cfg.generations + 1);
    history.push(pop[best_index(&pop)].score());
    sizes.push(pop.len());

    for _ in 0..cfg.generations {
        let mut ranked: Vec<&Candidate> = pop.iter().collect();
        ranked.sort_by(|a, b| a.score().total_cmp(&b.score()));
        let mut next: Vec<Candidate> = ranked[..cfg.elite_count].iter().map(|c| (*c).clone()).collect();

        let children: Vec<Vec<f64>> = (0..cfg.population)
            .map(|_| {
                let a = roulette_select(&pop, rng);
                let b = roulette_select(&pop, rng);
                let mut child = uniform_crossover(&pop[a].genes, &pop[b].genes, cfg.crossover_rate, rng)?;
                uniform_mutate(&mut child, cfg.mutation_rate, cfg.gene_low, cfg.gene_high, rng);
                Ok(child)
            })
            .collect::<Result<_>>()?;
        let fits = ev.eval_batch(&children, exec)?;
        next.extend(children.into_iter().zip(fits).map(|(g, f)| Candidate::scored(g, f)));

        // Stable: on ties the elite and earlier children survive.
        next.sort_by(|a, b| a.score().total_cmp(&b.score()));
        next.truncate(cfg.population);
        pop = next;

        history.push(pop[0].score());
        sizes.push(pop.len());
    }

    let b = best_index(&pop);
    Ok(RunTrace {
        best_genes: pop[b].genes.clone(),
        best_fitness: pop[b].score(),
        history,
        evaluation_count: ev.count,
        population_sizes: sizes,
    })
}
