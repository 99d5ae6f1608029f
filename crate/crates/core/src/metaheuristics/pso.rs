//! Global-best particle swarm with inertia, velocity clamping and random
//! particle death.

use serde::{Deserialize, Serialize};

use super::{check_dimension, Evaluator, Objective, RngStream, RunTrace};
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub swarm: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
    pub death_probability: f64,
    pub min_x: f64,
    pub max_x: f64,
    pub v_max: f64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        PsoConfig {
            swarm: 30,
            iterations: 1000,
            inertia: 0.9,
            c1: 2.0,
            c2: 2.0,
            death_probability: 0.01,
            min_x: -1.0,
            max_x: 1.0,
            v_max: 1.0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.swarm == 0 {
            return bad("PSO swarm must be nonempty");
        }
        if self.iterations == 0 {
            return bad("PSO needs at least one iteration");
        }
        if !(self.min_x < self.max_x) {
            return bad("PSO needs min_x < max_x");
        }
        if !(0.0..=1.0).contains(&self.death_probability) {
            return bad("PSO death probability must lie in [0, 1]");
        }
        if !(self.v_max > 0.0) {
            return bad("PSO v_max must be positive");
        }
        Ok(())
    }
}

/// One velocity component: inertia plus cognitive and social pulls,
/// clamped to `[-v_max, v_max]`.
#[allow(clippy::too_many_arguments)]
pub fn velocity_update(
    v: f64,
    x: f64,
    pbest: f64,
    gbest: f64,
    cfg: &PsoConfig,
    r1: f64,
    r2: f64,
) -> f64 {
    let v = cfg.inertia * v + cfg.c1 * r1 * (pbest - x) + cfg.c2 * r2 * (gbest - x);
    v.clamp(-cfg.v_max, cfg.v_max)
}

/// One position component after moving by `v`, clamped to the box.
pub fn position_update(x: f64, v: f64, cfg: &PsoConfig) -> f64 {
    (x + v).clamp(cfg.min_x, cfg.max_x)
}

struct Particle {
    x: Vec<f64>,
    v: Vec<f64>,
    best_x: Vec<f64>,
    best_f: f64,
}

#[allow(clippy::needless_range_loop)]
pub fn pso_run<O: Objective + ?Sized>(
    objective: &O,
    config: &PsoConfig,
    rng: &mut RngStream,
    exec: Execution,
) -> Result<RunTrace> {
    config.validate()?;
    let dim = check_dimension(objective)?;
    let cfg = config;

    let mut positions = Vec::with_capacity(cfg.swarm);
    let mut velocities = Vec::with_capacity(cfg.swarm);
    for _ in 0..cfg.swarm {
        positions.push((0..dim).map(|_| rng.uniform(cfg.min_x, cfg.max_x)).collect::<Vec<_>>());
        velocities.push((0..dim).map(|_| rng.uniform(-cfg.v_max, cfg.v_max)).collect::<Vec<_>>());
    }
    let mut ev = Evaluator::new(objective);
    let fits = ev.eval_batch(&positions, exec)?;
    let mut swarm: Vec<Particle> = positions
        .into_iter()
        .zip(velocities)
        .zip(fits)
        .map(|((x, v), f)| Particle {
            best_x: x.clone(),
            x,
            v,
            best_f: f,
        })
        .collect();

    // The global best starts as a randomly chosen particle.
    let g = rng.index(cfg.swarm);
    let mut gbest_x = swarm[g].x.clone();
    let mut gbest_f = swarm[g].best_f;

    let mut history = Vec::with_capacity(cfg.iterations + 1);
    let mut sizes = Vec::with_capacity(cfg.iterations + 1);
    history.push(gbest_f);
    sizes.push(swarm.len());

    for _ in 0..cfg.iterations {
        for p in swarm.iter_mut() {
            for d in 0..dim {
                let r1 = rng.unit();
                let r2 = rng.unit();
                p.v[d] = velocity_update(p.v[d], p.x[d], p.best_x[d], gbest_x[d], cfg, r1, r2);
                p.x[d] = position_update(p.x[d], p.v[d], cfg);
            }
            if rng.bernoulli(cfg.death_probability) {
                for d in 0..dim {
                    p.x[d] = rng.uniform(cfg.min_x, cfg.max_x);
                    p.v[d] = rng.uniform(-cfg.v_max, cfg.v_max);
                }
            }
            let f = ev.eval(&p.x)?;
            if f < p.best_f {
                p.best_f = f;
                p.best_x.clone_from(&p.x);
            }
            if f < gbest_f {
                gbest_f = f;
                gbest_x.clone_from(&p.x);
            }
        }
        history.push(gbest_f);
        sizes.push(swarm.len());
    }

    Ok(RunTrace {
        best_genes: gbest_x,
        best_fitness: gbest_f,
        history,
        evaluation_count: ev.count,
        population_sizes: sizes,
    })
}
