use flowmap::gen::{random_dataflow_path, waxman_layout, waxman_topology};
use flowmap::{enumerate_feasible, pathmap, validate_instance, GenParams, OracleLimits, SolverConfig};

#[test]
fn edge_count_tracks_waxman_expectation() {
    let seeds = 1000;
    let mut diffs = Vec::with_capacity(seeds);
    for seed in 0..seeds as u64 {
        let layout = waxman_layout(&GenParams {
            n: 20,
            seed,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(layout.graph.edge_count(), layout.waxman_edges + layout.tree_edges_added);
        let expected: f64 = layout.probabilities.iter().sum();
        diffs.push(layout.waxman_edges as f64 - expected);
    }
    let k = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / k;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let se = (var / k).sqrt();
    assert!(mean.abs() <= 3.0 * se, "mean deviation {mean} exceeds 3 SE ({se})");
}

#[test]
fn zero_requirements_are_always_feasible() {
    for seed in 0..50 {
        let params = GenParams {
            n: 8,
            p: 4,
            seed,
            req_scale: 1.0,
            ..Default::default()
        };
        let graph = waxman_topology(&params).unwrap();
        let mut path = random_dataflow_path(&graph, &params).unwrap();
        path.comp_reqs.iter_mut().for_each(|c| *c = 0.0);
        path.bw_reqs.iter_mut().for_each(|b| *b = 0.0);
        assert!(validate_instance(&graph, &path).feasible);
        let inst = flowmap::Instance::new(graph, path).unwrap();
        assert!(pathmap(&inst, &SolverConfig::default()).unwrap().best.is_some());
    }
}

#[test]
fn oracle_and_exact_agree_on_the_reference_seed() {
    let params = GenParams {
        n: 8,
        p: 3,
        req_scale: 0.5,
        seed: 42,
        ..Default::default()
    };
    let inst = flowmap::random_instance(&params).unwrap();
    let oracle = enumerate_feasible(&inst, &OracleLimits::default()).unwrap();
    let exact = pathmap(&inst, &SolverConfig::default()).unwrap();
    assert_eq!(oracle.is_empty(), exact.best.is_none());
}

#[test]
fn generated_instances_validate() {
    for seed in 0..200 {
        let params = GenParams {
            n: 2 + (seed as usize % 40),
            p: 2 + (seed as usize % 7),
            seed,
            ..Default::default()
        };
        let graph = waxman_topology(&params).unwrap();
        let path = random_dataflow_path(&graph, &params).unwrap();
        assert!(validate_instance(&graph, &path).feasible, "seed {seed}");
    }
}
