use diskarm_core::metrics::{parse_totals_csv, replay, totals, totals_csv};
use diskarm_core::modsbsm::{execute, VisitOutcome};
use diskarm_core::oracle::optimal_order;
use diskarm_core::schedulers::{baseline_schedule, simulate};
use diskarm_core::workload::{generate, TrackOrder};
use diskarm_core::{Algorithm, DiskGeometry, FaultModel, GeneratorParams, Scenario};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;

fn scenario(seed: u64, n: usize, platters: u32, order: TrackOrder) -> Scenario {
    generate(DiskGeometry::standard(platters), GeneratorParams::new(n, order, seed)).unwrap()
}

fn any_order() -> impl Strategy<Value = TrackOrder> {
    prop_oneof![Just(TrackOrder::Ascending), Just(TrackOrder::Descending), Just(TrackOrder::Random)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn baseline_orders_are_permutations(seed in any::<u64>(), n in 1usize..40, p in 1u32..5, order in any_order()) {
        let s = scenario(seed, n, p, order);
        for alg in Algorithm::ALL.into_iter().filter(|a| *a != Algorithm::Modsbsm) {
            for hints in [false, true] {
                let mut got = baseline_schedule(&s, alg, hints).unwrap().order();
                got.sort_unstable();
                prop_assert_eq!(got, (0..n).collect::<Vec<_>>(), "{}", alg);
            }
        }
    }

    #[test]
    fn fault_free_modsbsm_serves_each_request_once(seed in any::<u64>(), n in 1usize..40, p in 1u32..5, order in any_order()) {
        let s = scenario(seed, n, p, order);
        let run = execute(&s, FaultModel::healthy()).unwrap();
        prop_assert_eq!(run.passes, 1);
        let mut served: Vec<usize> = run.visits.iter().map(|v| v.request).collect();
        served.sort_unstable();
        prop_assert_eq!(served, (0..n).collect::<Vec<_>>());
        prop_assert!(run.visits.iter().all(|v| v.outcome == VisitOutcome::Served));
    }

    #[test]
    fn modsbsm_totals_equal_replay_of_its_visits(seed in any::<u64>(), n in 1usize..30, bad in 0usize..4) {
        let g = DiskGeometry::standard(3);
        let s = generate(g, GeneratorParams { request_count: n, order: TrackOrder::Random, bad_count: bad.min(n), seed });
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let run = execute(&s, FaultModel::new(s.faults.clone())).unwrap();
        let path: Vec<_> = run.visits.iter().map(|v| s.requests[v.request].address).collect();
        let steps = replay(&s.geometry, s.initial_head, &path).unwrap();
        prop_assert_eq!(totals(&steps, steps.len()).unwrap(), run.totals);
        for (addr, _) in s.faults.bad_entries() {
            prop_assert_eq!(run.faults.probe_count(addr), 3);
        }
    }

    #[test]
    fn single_platter_transfer_equals_request_count(seed in any::<u64>(), n in 1usize..40) {
        let s = scenario(seed, n, 1, TrackOrder::Random);
        for alg in Algorithm::ALL {
            prop_assert_eq!(simulate(&s, alg, false).unwrap().totals.tdtt, n as u64);
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), n in 1usize..30) {
        let s = scenario(seed, n, 4, TrackOrder::Random);
        for alg in Algorithm::ALL {
            let a = simulate(&s, alg, false).unwrap();
            let b = simulate(&s, alg, false).unwrap();
            prop_assert_eq!(a.steps, b.steps);
        }
    }

    #[test]
    fn totals_csv_round_trips(seed in any::<u64>(), n in 1usize..30) {
        let s = scenario(seed, n, 2, TrackOrder::Random);
        let runs: Vec<_> = Algorithm::ALL.into_iter().map(|a| (a, simulate(&s, a, false).unwrap().totals)).collect();
        let text = totals_csv(runs.iter().map(|(a, t)| (a.name(), t)));
        let rows = parse_totals_csv(&text).unwrap();
        prop_assert_eq!(rows.len(), runs.len());
        for (row, (a, t)) in rows.iter().zip(&runs) {
            prop_assert_eq!(&row.algorithm, a.name());
            prop_assert_eq!((row.tskt, row.trl, row.tdtt, row.tdat), t.as_tuple());
            prop_assert_eq!(&row.adat, &t.adat_display());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn oracle_ignores_request_labels(seed in any::<u64>(), n in 1usize..7, p in 1u32..5) {
        let s = scenario(seed, n, p, TrackOrder::Random);
        let mut shuffled = s.clone();
        shuffled.requests.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
        prop_assert_eq!(optimal_order(&s).unwrap().best_totals, optimal_order(&shuffled).unwrap().best_totals);
    }
}

#[test]
fn sstf_usually_beats_fcfs_on_random_arrivals() {
    let seeds = 500;
    let wins = (0..seeds)
        .filter(|&seed| {
            let s = scenario(seed, 20, 1 + (seed % 4) as u32, TrackOrder::Random);
            let sstf = simulate(&s, Algorithm::Sstf, false).unwrap().totals.tskt;
            let fcfs = simulate(&s, Algorithm::Fcfs, false).unwrap().totals.tskt;
            sstf <= fcfs
        })
        .count();
    assert!(wins * 100 >= 95 * seeds as usize, "sstf <= fcfs on {wins}/{seeds}");
}

#[test]
fn oracle_bounds_modsbsm_on_case2_windows() {
    let case = diskarm_core::workload::builtin_case(2).unwrap();
    for start in [0, 6, 12] {
        let mut s = case.clone();
        s.requests = case.requests[start..start + 8].to_vec();
        let best = optimal_order(&s).unwrap();
        assert_eq!(best.orders_examined, 40_320);
        let m = simulate(&s, Algorithm::Modsbsm, false).unwrap().totals.tdat;
        assert!(best.best_totals.tdat <= m, "start {start}: {} > {m}", best.best_totals.tdat);
    }
}
