//! Symbiotic organisms search.
//!
//! Every sweep visits each organism once and applies mutualism,
//! commensalism and parasitism in turn, each against its own randomly
//! drawn partner. All replacements are greedy with strict improvement.
//! Positions are not clamped after initialization.

use serde::{Deserialize, Serialize};

use super::{
    best_index, check_dimension, random_population, Candidate, Evaluator, Objective, RngStream,
    RunTrace,
};
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SosConfig {
    pub population: usize,
    pub iterations: usize,
    pub init_low: f64,
    pub init_high: f64,
}

impl Default for SosConfig {
    fn default() -> Self {
        SosConfig {
            population: 30,
            iterations: 1000,
            init_low: 0.0,
            init_high: 1.0,
        }
    }
}

impl SosConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 3 {
            return Err(Error::InvalidConfig("SOS needs a population of at least 3".into()));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidConfig("SOS needs at least one iteration".into()));
        }
        if !(self.init_low < self.init_high) {
            return Err(Error::InvalidConfig("SOS init range is empty".into()));
        }
        Ok(())
    }
}

/// `x_i + r * (best - bf * (x_i + x_j) / 2)`.
pub fn mutualism_offspring(xi: &[f64], xj: &[f64], best: &[f64], bf: f64, r: f64) -> Vec<f64> {
    xi.iter()
        .zip(xj)
        .zip(best)
        .map(|((a, b), g)| a + r * (g - (a + b) / 2.0 * bf))
        .collect()
}

/// `x_i + r * (best - x_j)`.
pub fn commensal_offspring(xi: &[f64], xj: &[f64], best: &[f64], r: f64) -> Vec<f64> {
    xi.iter()
        .zip(xj)
        .zip(best)
        .map(|((a, b), g)| a + r * (g - b))
        .collect()
}

/// Copy of `xi` with a random nonempty subset of dimensions redrawn from
/// `[low, high)`. Each dimension joins the subset with probability 1/2.
fn parasite(xi: &[f64], low: f64, high: f64, rng: &mut RngStream) -> Vec<f64> {
    let mask = loop {
        let m: Vec<bool> = (0..xi.len()).map(|_| rng.bernoulli(0.5)).collect();
        if m.iter().any(|&b| b) {
            break m;
        }
    };
    xi.iter()
        .zip(mask)
        .map(|(&g, redraw)| if redraw { rng.uniform(low, high) } else { g })
        .collect()
}

fn keep_better(old: &Candidate, genes: Vec<f64>, fitness: f64) -> Candidate {
    if fitness < old.score() {
        Candidate::scored(genes, fitness)
    } else {
        old.clone()
    }
}

/// One mutualism interaction. Returns the surviving `(x_i, x_j)`.
pub fn mutualism_step<O: Objective + ?Sized>(
    xi: &Candidate,
    xj: &Candidate,
    best: &[f64],
    rng: &mut RngStream,
    objective: &O,
) -> Result<(Candidate, Candidate)> {
    let mut ev = Evaluator::new(objective);
    mutualism(xi, xj, best, rng, &mut ev)
}

fn mutualism<O: Objective + ?Sized>(
    xi: &Candidate,
    xj: &Candidate,
    best: &[f64],
    rng: &mut RngStream,
    ev: &mut Evaluator<'_, O>,
) -> Result<(Candidate, Candidate)> {
    let bf1 = rng.benefit_factor();
    let bf2 = rng.benefit_factor();
    let r1 = rng.unit();
    let r2 = rng.unit();
    let new_i = mutualism_offspring(&xi.genes, &xj.genes, best, bf1, r1);
    let new_j = mutualism_offspring(&xj.genes, &xi.genes, best, bf2, r2);
    let fi = ev.eval(&new_i)?;
    let fj = ev.eval(&new_j)?;
    Ok((keep_better(xi, new_i, fi), keep_better(xj, new_j, fj)))
}

/// One commensalism interaction. Returns the surviving `x_i`.
pub fn commensalism_step<O: Objective + ?Sized>(
    xi: &Candidate,
    xj: &Candidate,
    best: &[f64],
    rng: &mut RngStream,
    objective: &O,
) -> Result<Candidate> {
    let mut ev = Evaluator::new(objective);
    commensalism(xi, xj, best, rng, &mut ev)
}

fn commensalism<O: Objective + ?Sized>(
    xi: &Candidate,
    xj: &Candidate,
    best: &[f64],
    rng: &mut RngStream,
    ev: &mut Evaluator<'_, O>,
) -> Result<Candidate> {
    let r = rng.symmetric();
    let new = commensal_offspring(&xi.genes, &xj.genes, best, r);
    let f = ev.eval(&new)?;
    Ok(keep_better(xi, new, f))
}

/// One parasitism interaction. Returns the parasite when it displaces
/// `x_j`, `None` otherwise.
pub fn parasitism_step<O: Objective + ?Sized>(
    xi: &Candidate,
    xj: &Candidate,
    low: f64,
    high: f64,
    rng: &mut RngStream,
    objective: &O,
) -> Result<Option<Candidate>> {
    let mut ev = Evaluator::new(objective);
    parasitism(xi, xj, low, high, rng, &mut ev)
}

fn parasitism<O: Objective + ?Sized>(
    xi: &Candidate,
    xj: &Candidate,
    low: f64,
    high: f64,
    rng: &mut RngStream,
    ev: &mut Evaluator<'_, O>,
) -> Result<Option<Candidate>> {
    let p = parasite(&xi.genes, low, high, rng);
    let f = ev.eval(&p)?;
    Ok((f < xj.score()).then(|| Candidate::scored(p, f)))
}

/// Runs SOS from a random ecosystem.
pub fn sos_run<O: Objective + ?Sized>(
    objective: &O,
    config: &SosConfig,
    rng: &mut RngStream,
    exec: Execution,
) -> Result<RunTrace> {
    sos_run_with(objective, config, rng, exec, &[])
}

/// Runs SOS with the first organisms replaced by `seeds` after random
/// initialization (the random draws still happen, so the stream position
/// does not depend on the seeds).
pub fn sos_run_with<O: Objective + ?Sized>(
    objective: &O,
    config: &SosConfig,
    rng: &mut RngStream,
    exec: Execution,
    seeds: &[Vec<f64>],
) -> Result<RunTrace> {
    config.validate()?;
    let dim = check_dimension(objective)?;
    if seeds.len() > config.population {
        return Err(Error::InvalidConfig("more seed organisms than population".into()));
    }
    let mut eco = random_population(config.population, dim, config.init_low, config.init_high, rng)?;
    for (org, seed) in eco.iter_mut().zip(seeds) {
        if seed.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: seed.len(),
            });
        }
        org.genes.clone_from(seed);
    }

    let mut ev = Evaluator::new(objective);
    ev.score_all(&mut eco, exec)?;

    let n = eco.len();
    let mut history = Vec::with_capacity(config.iterations + 1);
    let mut sizes = Vec::with_capacity(config.iterations + 1);
    history.push(eco[best_index(&eco)].score());
    sizes.push(n);

    for _ in 0..config.iterations {
        for i in 0..n {
            let best = eco[best_index(&eco)].genes.clone();

            let j = rng.index_excluding(n, i);
            let (new_i, new_j) = mutualism(&eco[i], &eco[j], &best, rng, &mut ev)?;
            eco[i] = new_i;
            eco[j] = new_j;

            let j = rng.index_excluding(n, i);
            eco[i] = commensalism(&eco[i], &eco[j], &best, rng, &mut ev)?;

            let j = rng.index_excluding(n, i);
            if let Some(p) = parasitism(&eco[i], &eco[j], config.init_low, config.init_high, rng, &mut ev)? {
                eco[j] = p;
            }
        }
        history.push(eco[best_index(&eco)].score());
        sizes.push(eco.len());
    }

    let b = best_index(&eco);
    Ok(RunTrace {
        best_genes: eco[b].genes.clone(),
        best_fitness: eco[b].score(),
        history,
        evaluation_count: ev.count,
        population_sizes: sizes,
    })
}
