use symbio::ffnn::{FfnnObjective, Topology};
use symbio::marketdata::make_pairs;
use symbio::metaheuristics::*;
use symbio::{Error, Execution};

fn sos(iterations: usize) -> SosConfig {
    SosConfig { iterations, ..SosConfig::default() }
}

fn pso(iterations: usize) -> PsoConfig {
    PsoConfig { iterations, ..PsoConfig::default() }
}

fn ga(generations: usize) -> GaConfig {
    GaConfig { generations, ..GaConfig::default() }
}

fn ffnn_objective() -> FfnnObjective {
    let rows: Vec<[f64; 2]> = (0..60)
        .map(|t| {
            let v = 0.5 + 0.4 * (t as f64 / 6.0).sin();
            [v, 0.9 * v + 0.05]
        })
        .collect();
    FfnnObjective::new(Topology::default(), make_pairs(&rows).unwrap()).unwrap()
}

#[test]
fn two_d_sphere_improves_on_initial_best() {
    let sphere = Sphere { dimension: 2 };
    let mut improved = [0; 3];
    for s in 0..100 {
        let seed = derive_seed(77, s);
        let traces = [
            sos_run(&sphere, &sos(50), &mut RngStream::new(seed), Execution::Sequential).unwrap(),
            pso_run(&sphere, &pso(50), &mut RngStream::new(seed), Execution::Sequential).unwrap(),
            ga_run(&sphere, &ga(50), &mut RngStream::new(seed), Execution::Sequential).unwrap(),
        ];
        for (k, t) in traces.iter().enumerate() {
            if t.best_fitness < t.history[0] {
                improved[k] += 1;
            }
        }
    }
    assert!(improved.iter().all(|&n| n >= 99), "{improved:?}");
}

#[test]
fn evaluation_budgets() {
    let sphere = Sphere { dimension: 4 };
    let t = sos_run(&sphere, &sos(7), &mut RngStream::new(1), Execution::Sequential).unwrap();
    assert_eq!(t.evaluation_count, 30 + 7 * 120);
    let t = pso_run(&sphere, &pso(7), &mut RngStream::new(1), Execution::Sequential).unwrap();
    assert_eq!(t.evaluation_count, 30 + 7 * 30);
    let t = ga_run(&sphere, &ga(7), &mut RngStream::new(1), Execution::Sequential).unwrap();
    assert_eq!(t.evaluation_count, 30 + 7 * 30);
    for t in [
        sos_run(&sphere, &sos(7), &mut RngStream::new(2), Execution::Sequential).unwrap(),
        pso_run(&sphere, &pso(7), &mut RngStream::new(2), Execution::Sequential).unwrap(),
        ga_run(&sphere, &ga(7), &mut RngStream::new(2), Execution::Sequential).unwrap(),
    ] {
        assert_eq!(t.history.len(), 8);
        assert!(t.population_sizes.iter().all(|&n| n == 30));
    }
}

#[test]
fn schedules_are_bit_identical_on_network_fitness() {
    let obj = ffnn_objective();
    for seed in [3, 4] {
        let run = |exec| {
            [
                sos_run(&obj, &sos(15), &mut RngStream::new(seed), exec).unwrap(),
                pso_run(&obj, &pso(15), &mut RngStream::new(seed), exec).unwrap(),
                ga_run(&obj, &ga(15), &mut RngStream::new(seed), exec).unwrap(),
            ]
        };
        assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
    }
}

#[test]
fn same_seed_same_trace_different_seed_differs() {
    let obj = ffnn_objective();
    let a = sos_run(&obj, &sos(10), &mut RngStream::new(9), Execution::Sequential).unwrap();
    let b = sos_run(&obj, &sos(10), &mut RngStream::new(9), Execution::Sequential).unwrap();
    let c = sos_run(&obj, &sos(10), &mut RngStream::new(10), Execution::Sequential).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.best_genes, c.best_genes);
}

#[test]
fn network_training_reduces_fitness() {
    let obj = ffnn_objective();
    for t in [
        sos_run(&obj, &sos(40), &mut RngStream::new(5), Execution::Sequential).unwrap(),
        pso_run(&obj, &pso(40), &mut RngStream::new(5), Execution::Sequential).unwrap(),
        ga_run(&obj, &ga(40), &mut RngStream::new(5), Execution::Sequential).unwrap(),
    ] {
        assert!(t.best_fitness < t.history[0]);
        assert_eq!(obj.evaluate(&t.best_genes), t.best_fitness);
    }
}

#[test]
fn non_finite_fitness_aborts() {
    let bad = FnObjective::new(3, |x: &[f64]| if x[0] > 0.9 { f64::NAN } else { x[0] });
    let sos_err = sos_run(&bad, &sos(200), &mut RngStream::new(1), Execution::Sequential);
    let pso_err = pso_run(&bad, &pso(200), &mut RngStream::new(1), Execution::Sequential);
    let ga_err = ga_run(&bad, &ga(200), &mut RngStream::new(1), Execution::Sequential);
    for r in [sos_err, pso_err, ga_err] {
        assert!(matches!(r, Err(Error::NonFiniteFitness { .. })), "{r:?}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let sphere = Sphere { dimension: 2 };
    let tiny = SosConfig { population: 2, ..SosConfig::default() };
    assert!(sos_run(&sphere, &tiny, &mut RngStream::new(1), Execution::Sequential).is_err());
    let bad_rate = GaConfig { crossover_rate: 1.5, ..GaConfig::default() };
    assert!(ga_run(&sphere, &bad_rate, &mut RngStream::new(1), Execution::Sequential).is_err());
}
