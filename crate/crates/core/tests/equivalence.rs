use std::collections::BTreeSet;

use flowmap::exact::{init_source_maps, SolverState};
use flowmap::experiment::BatchConfig;
use flowmap::{
    enumerate_feasible, optimal_by_search, pathmap, run_simulation, AdmissionPolicy, CompleteMapping, Instance, Mode,
    OracleLimits, SimConfig, SolverConfig,
};

fn instances(seeds: std::ops::Range<u64>, n: [usize; 2], p: [usize; 2]) -> Vec<(u64, Instance)> {
    let cfg = BatchConfig {
        n_range: n,
        p_range: p,
        ..Default::default()
    };
    seeds.map(|s| (s, cfg.instance_for(s).unwrap())).collect()
}

fn as_set(ms: &[CompleteMapping]) -> BTreeSet<String> {
    ms.iter().map(|m| serde_json::to_string(m).unwrap()).collect()
}

#[test]
fn keep_all_sink_set_equals_oracle() {
    for (seed, inst) in instances(1000..1080, [4, 9], [3, 6]) {
        let exact = pathmap(&inst, &SolverConfig::default()).unwrap();
        let oracle = enumerate_feasible(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(as_set(&exact.all_at_sink), as_set(&oracle), "seed {seed}");
        let oracle_best = oracle
            .iter()
            .map(|m| m.cost)
            .fold(None, |a: Option<f64>, c| Some(a.map_or(c, |a| a.min(c))));
        assert_eq!(exact.best.map(|m| m.cost), oracle_best, "seed {seed}");
    }
}

#[test]
fn distributed_keep_all_records_the_same_set() {
    for (seed, inst) in instances(2000..2060, [4, 9], [3, 6]) {
        let exact = pathmap(&inst, &SolverConfig::default()).unwrap();
        let sim = run_simulation(&inst, &SimConfig::default()).unwrap();
        assert!(!sim.truncated, "seed {seed}");
        let mut recorded = sim.solutions.clone();
        recorded.sort_by_key(|m| serde_json::to_string(m).unwrap());
        recorded.dedup();
        assert_eq!(as_set(&recorded), as_set(&exact.all_at_sink), "seed {seed}");
        assert_eq!(sim.best, exact.best, "seed {seed}");
    }
}

#[test]
fn first_arrival_is_optimal_with_positive_latencies() {
    for (seed, inst) in instances(3000..3060, [4, 9], [3, 6]) {
        assert!(inst.graph.edges().iter().all(|e| e.latency > 0.0));
        let sim = run_simulation(&inst, &SimConfig::default()).unwrap();
        assert_eq!(sim.first_arrival_cost, sim.best.as_ref().map(|m| m.cost), "seed {seed}");
    }
}

#[test]
fn search_matches_keep_all_optimum() {
    for (seed, inst) in instances(4000..4100, [4, 12], [2, 7]) {
        let exact = pathmap(&inst, &SolverConfig::default()).unwrap();
        let search = optimal_by_search(&inst).unwrap();
        assert_eq!(search.best.map(|m| m.cost), exact.best.map(|m| m.cost), "seed {seed}");
    }
}

#[test]
fn first_feasible_agrees_with_optimal_on_feasibility() {
    for (seed, inst) in instances(5000..5100, [4, 10], [2, 6]) {
        let opt = pathmap(&inst, &SolverConfig::default()).unwrap();
        let ff = pathmap(
            &inst,
            &SolverConfig {
                mode: Mode::FirstFeasible,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(ff.best.is_some(), opt.best.is_some(), "seed {seed}");
        let sim = run_simulation(
            &inst,
            &SimConfig {
                mode: Mode::FirstFeasible,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sim.best.is_some(), opt.best.is_some(), "seed {seed}");
    }
}

#[test]
fn low_memory_mode_keeps_the_optimum() {
    for (seed, inst) in instances(6000..6060, [4, 9], [3, 6]) {
        let keep = pathmap(&inst, &SolverConfig::default()).unwrap();
        let drop = pathmap(
            &inst,
            &SolverConfig {
                retain_old: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(drop.best.map(|m| m.cost), keep.best.map(|m| m.cost), "seed {seed}");
    }
}

#[test]
fn extension_attempts_per_relax_respect_the_summation_bound() {
    for (seed, inst) in instances(7000..7040, [4, 9], [2, 7]) {
        let final_s = pathmap(&inst, &SolverConfig::default()).unwrap().stats.max_slot_size as f64;
        let p = inst.p() as f64;
        let bound = final_s * (p + (p - 1.0) * p / 4.0 + (p - 1.0) * p * (2.0 * p - 1.0) / 12.0);
        let n = inst.graph.node_count();
        let mut state = SolverState::new(&inst, SolverConfig::default());
        for m in init_source_maps(&inst) {
            state.offer(m);
        }
        let mut live = state.advance();
        let mut sweeps = 0;
        while live && sweeps < n - 1 {
            for u in 0..n {
                let targets: Vec<usize> = inst.graph.neighbors(u).iter().map(|nb| nb.node).collect();
                for v in targets {
                    let before = state.stats.extension_attempts;
                    state.relax(u, v);
                    let used = (state.stats.extension_attempts - before) as f64;
                    assert!(used <= bound, "seed {seed}: {used} attempts > {bound}");
                }
            }
            live = state.advance();
            sweeps += 1;
        }
    }
}

#[test]
fn least_cost_keeps_one_map_per_slot() {
    for (seed, inst) in instances(8000..8040, [5, 20], [2, 8]) {
        let r = pathmap(&inst, &SolverConfig::with_admission(AdmissionPolicy::LeastCost)).unwrap();
        assert!(r.stats.max_slot_size <= 1, "seed {seed}");
        assert!(r.stats.total_maps <= inst.graph.node_count() * inst.p(), "seed {seed}");
        let sim = run_simulation(&inst, &SimConfig::with_admission(AdmissionPolicy::LeastCost)).unwrap();
        assert!(sim.stats.max_slot_size <= 1, "seed {seed}");
    }
}

#[test]
fn annealed_slots_stay_within_max_slot() {
    for (seed, inst) in instances(9000..9040, [5, 20], [2, 8]) {
        let policy = AdmissionPolicy::Annealed {
            t0: 50.0,
            alpha: 0.9,
            max_slot: 3,
        };
        let r = pathmap(&inst, &SolverConfig::with_admission(policy.clone())).unwrap();
        assert!(r.stats.max_slot_size <= 3, "seed {seed}");
        let sim = run_simulation(&inst, &SimConfig::with_admission(policy)).unwrap();
        assert!(sim.stats.max_slot_size <= 3, "seed {seed}");
    }
}

#[test]
fn runs_are_deterministic() {
    for (_, inst) in instances(10_000..10_020, [5, 15], [2, 6]) {
        for policy in [AdmissionPolicy::KeepAll, AdmissionPolicy::annealed_default(&inst)] {
            let cfg = SolverConfig {
                neighbors: flowmap::NeighborPolicy::RandomK { k: 2 },
                seed: 9,
                ..SolverConfig::with_admission(policy.clone())
            };
            let mut a = pathmap(&inst, &cfg).unwrap();
            let mut b = pathmap(&inst, &cfg).unwrap();
            a.stats.wall_ms = 0.0;
            b.stats.wall_ms = 0.0;
            assert_eq!(a, b);
            let sim = SimConfig {
                record_trace: true,
                seed: 9,
                ..SimConfig::with_admission(policy)
            };
            let x = run_simulation(&inst, &sim).unwrap();
            let y = run_simulation(&inst, &sim).unwrap();
            assert_eq!(x.trace, y.trace);
            assert_eq!(x.best, y.best);
        }
    }
}
