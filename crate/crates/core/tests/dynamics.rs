mod common;

use std::collections::BTreeMap;

use common::{initial_oracle, kernel_oracle, key_of, state, Key};
use evoter::dynamics::{
    counter_engine_run, run_until, Clock, Model, ModelVariant, RunConfig, Rewiring, Selection, StepKind,
};
use evoter::stats::{chi_square_critical, chi_square_statistic, ks_critical, ks_statistic, mean};
use evoter::{EdgeId, NetState, VertexId};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn fnv(bytes: impl IntoIterator<Item = u8>) -> u64 {
    bytes.into_iter().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

fn fingerprint(s: &NetState) -> u64 {
    let (ops, edges) = key_of(s);
    fnv(ops.into_iter().chain(edges.into_iter().flat_map(|(u, v)| [u as u8, v as u8])))
}

#[test]
fn initial_state_consumes_one_draw_per_pair_then_per_vertex() {
    for seed in 0..20 {
        let mut a = ChaCha8Rng::seed_from_u64(seed);
        let mut b = ChaCha8Rng::seed_from_u64(seed);
        let s = NetState::sample_initial(6, &mut a).unwrap();
        assert_eq!(key_of(&s), initial_oracle(6, &mut b), "seed {seed}");
        // Both streams must be at the same position afterwards.
        assert_eq!(rand::RngCore::next_u64(&mut a), rand::RngCore::next_u64(&mut b));
    }
}

#[test]
fn initial_state_is_roughly_g_n_half() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = NetState::sample_initial(200, &mut rng).unwrap();
    let pairs = 200.0 * 199.0 / 2.0;
    assert!((s.edge_count() as f64 / pairs - 0.5).abs() < 0.01);
    assert!(s.audit().is_empty());
}

// Frozen from the first release of the step engine; any change to the order
// of random draws breaks this on purpose.
#[test]
fn golden_trajectory() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut s = NetState::sample_initial(12, &mut rng).unwrap();
    let model = Model::new(ModelVariant::random_direct(), 1.5, 12).unwrap();
    for _ in 0..40 {
        model.step(&mut s, &mut rng);
    }
    let got = (s.t(), s.n1(), s.disagreeing_count(), s.edge_count(), fingerprint(&s));
    assert_eq!(got, GOLDEN);
}

const GOLDEN: (u64, usize, usize, usize, u64) = (40, 6, 4, 36, 5_024_386_348_868_887_980);

fn kernel_key_state() -> NetState {
    state(&[0, 0, 1, 1], &[(0, 2), (1, 2), (0, 1), (2, 3), (0, 3)])
}

#[test]
fn one_step_law_matches_brute_force() {
    const TRIALS: usize = 100_000;
    let start = kernel_key_state();
    let beta = 1.2;
    let q = beta / 4.0;
    for rewiring in [Rewiring::RewireToRandom, Rewiring::RewireToSame] {
        for clock in [Clock::Direct, Clock::Starred, Clock::Continuous] {
            let variant = ModelVariant::new(rewiring, clock);
            let model = Model::new(variant, beta, 4).unwrap();
            let exact = kernel_oracle(
                &key_of(&start),
                q,
                rewiring == Rewiring::RewireToSame,
                clock == Clock::Direct,
            );
            let total: f64 = exact.values().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let mut counts: BTreeMap<Key, usize> = BTreeMap::new();
            for _ in 0..TRIALS {
                let mut s = start.clone();
                model.step(&mut s, &mut rng);
                *counts.entry(key_of(&s)).or_default() += 1;
            }
            for k in counts.keys() {
                assert!(exact.contains_key(k), "{variant}: impossible outcome {k:?}");
            }
            for (k, p) in &exact {
                let f = counts.get(k).copied().unwrap_or(0) as f64 / TRIALS as f64;
                assert!((f - p).abs() <= 0.01, "{variant}: {k:?} exact {p} empirical {f}");
            }
        }
    }
}

#[test]
fn library_kernel_agrees_with_oracle() {
    let start = kernel_key_state();
    for variant in ModelVariant::ALL {
        let model = Model::new(variant, 2.0, 4).unwrap();
        let lib = evoter::dynamics::one_step_kernel(&start, &model).unwrap();
        let oracle = kernel_oracle(
            &key_of(&start),
            0.5,
            variant.rewiring == Rewiring::RewireToSame,
            variant.clock == Clock::Direct,
        );
        assert_eq!(lib.len(), oracle.len(), "{variant}");
        let lib_total: f64 = lib.values().sum();
        let mut lib_sorted: Vec<f64> = lib.values().copied().collect();
        let mut oracle_sorted: Vec<f64> = oracle.values().copied().collect();
        lib_sorted.sort_by(f64::total_cmp);
        oracle_sorted.sort_by(f64::total_cmp);
        assert!((lib_total - 1.0).abs() < 1e-12);
        for (a, b) in lib_sorted.iter().zip(&oracle_sorted) {
            assert!((a - b).abs() < 1e-12, "{variant}");
        }
    }
}

#[test]
fn disagreeing_edge_selection_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = NetState::sample_initial(12, &mut rng).unwrap();
    let model = Model::new(ModelVariant::random_direct(), 1.0, 12).unwrap();
    let disagreeing: Vec<EdgeId> = s.disagreeing().collect();
    let mut counts = vec![0u64; s.edge_count()];
    for _ in 0..60_000 {
        match model.select(&s, &mut rng) {
            Selection::Disagreeing { edge, .. } => counts[edge.index()] += 1,
            other => panic!("unexpected {other:?}"),
        }
    }
    let observed: Vec<u64> = disagreeing.iter().map(|e| counts[e.index()]).collect();
    assert_eq!(observed.iter().sum::<u64>(), 60_000);
    let probs = vec![1.0 / observed.len() as f64; observed.len()];
    let df = observed.len() - 1;
    assert!(chi_square_statistic(&observed, &probs) < chi_square_critical(df, 0.001));
}

#[test]
fn rewire_targets_are_uniform() {
    // Edge 0 joins 0 and 1; each root is drawn with probability 1/2 and the
    // target uniformly from its pool, so every landing bond has a known weight.
    let start = state(&[0, 1, 0, 1, 0, 1, 0, 1], &[(0, 1), (2, 3)]);
    for rewiring in [Rewiring::RewireToRandom, Rewiring::RewireToSame] {
        let mut expected: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for root in [0u32, 1] {
            let pool: Vec<u32> = (0..8)
                .filter(|&w| w != root && (rewiring == Rewiring::RewireToRandom || w % 2 == root % 2))
                .collect();
            for &w in &pool {
                *expected.entry((root.min(w), root.max(w))).or_default() += 0.5 / pool.len() as f64;
            }
        }
        // beta = 0 rules out relabelling.
        let model = Model::new(ModelVariant::new(rewiring, Clock::Direct), 0.0, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts: BTreeMap<(u32, u32), u64> = BTreeMap::new();
        for _ in 0..40_000 {
            let mut s = start.clone();
            match model.apply(&mut s, EdgeId(0), &mut rng).kind {
                StepKind::Rewire { to, .. } => *counts.entry((to.u().0, to.v().0)).or_default() += 1,
                other => panic!("unexpected {other:?}"),
            }
        }
        for k in counts.keys() {
            assert!(expected.contains_key(k), "{rewiring}: target {k:?} outside the pool");
        }
        let observed: Vec<u64> = expected.keys().map(|k| counts.get(k).copied().unwrap_or(0)).collect();
        let probs: Vec<f64> = expected.values().copied().collect();
        let stat = chi_square_statistic(&observed, &probs);
        assert!(stat < chi_square_critical(probs.len() - 1, 0.001), "{rewiring}: chi2 {stat}");
    }
}

#[test]
fn relabels_move_n1_by_a_fair_unit_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut up, mut down) = (0u64, 0u64);
    for _ in 0..50 {
        let mut s = NetState::sample_initial(30, &mut rng).unwrap();
        let model = Model::new(ModelVariant::random_direct(), 10.0, 30).unwrap();
        for _ in 0..2000 {
            let before = s.n1() as i64;
            let out = model.step(&mut s, &mut rng);
            let delta = s.n1() as i64 - before;
            match out.kind {
                StepKind::Relabel { .. } => match delta {
                    1 => up += 1,
                    -1 => down += 1,
                    d => panic!("relabel moved N1 by {d}"),
                },
                StepKind::Absorbed(_) => break,
                _ => assert_eq!(delta, 0),
            }
        }
    }
    let total = (up + down) as f64;
    let z = (up as f64 - total / 2.0) / (total / 4.0).sqrt();
    assert!(total > 10_000.0);
    assert!(z.abs() < 4.0, "up {up} down {down}");
}

#[test]
fn continuous_holding_times_are_exponential_2n() {
    let start = kernel_key_state();
    let rate = 2.0 * start.edge_count() as f64;
    let model = Model::new(ModelVariant::new(Rewiring::RewireToRandom, Clock::Continuous), 1.0, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let times: Vec<f64> = (0..100_000)
        .map(|_| {
            let mut s = start.clone();
            model.step(&mut s, &mut rng).elapsed
        })
        .collect();
    let m = mean(&times);
    assert!((m * rate - 1.0).abs() < 0.02, "mean {m}");
    for x in [0.5, 1.0, 2.0] {
        let tail = times.iter().filter(|&&t| t * rate > x).count() as f64 / times.len() as f64;
        assert!((tail - (-x).exp()).abs() < 0.006, "tail at {x}: {tail}");
    }
}

#[test]
fn starred_chain_without_no_ops_has_the_direct_law() {
    const RUNS: u64 = 600;
    let n = 20;
    let config = RunConfig {
        trajectory_stride: 0,
        ..RunConfig::for_n(n)
    };
    let sample = |clock: Clock| -> Vec<f64> {
        let model = Model::new(ModelVariant::new(Rewiring::RewireToRandom, clock), 2.0, n).unwrap();
        (0..RUNS)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 * clock as u64 + i);
                let mut s = NetState::sample_initial(n, &mut rng).unwrap();
                let r = run_until(&mut s, &model, &config, &mut rng).unwrap();
                assert!(!r.censored);
                (r.tau - r.noop_count) as f64
            })
            .collect()
    };
    let (direct, starred) = (sample(Clock::Direct), sample(Clock::Starred));
    let d = ks_statistic(&direct, &starred);
    assert!(d < ks_critical(0.001, direct.len(), starred.len()), "D = {d}");
}

#[test]
fn counter_engine_matches_step_engine_in_law() {
    const RUNS: u64 = 600;
    let (n, beta) = (30, 1.5);
    let config = RunConfig {
        trajectory_stride: 0,
        ..RunConfig::for_n(n)
    };
    let model = Model::new(ModelVariant::random_direct(), beta, n).unwrap();
    let taus = |counter: bool| -> Vec<f64> {
        (0..RUNS)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(i + if counter { 1 << 40 } else { 0 });
                let mut s = NetState::sample_initial(n, &mut rng).unwrap();
                let tau = if counter {
                    counter_engine_run(&mut s, beta, &config, &mut rng).unwrap().0.tau
                } else {
                    run_until(&mut s, &model, &config, &mut rng).unwrap().tau
                };
                tau as f64
            })
            .collect()
    };
    let (a, b) = (taus(false), taus(true));
    let d = ks_statistic(&a, &b);
    assert!(d < ks_critical(0.001, a.len(), b.len()), "D = {d}");
}

#[test]
fn rewire_same_stops_at_a_singleton_class() {
    let model = Model::new(ModelVariant::new(Rewiring::RewireToSame, Clock::Direct), 1.0, 5).unwrap();
    let mut s = state(&[0, 0, 0, 0, 1], &[(0, 4), (1, 4)]);
    assert!(model.absorb_reason(&s).is_some());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(matches!(model.step(&mut s, &mut rng).kind, StepKind::Absorbed(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_steps_keep_the_state_consistent(seed in any::<u64>(), n in 4usize..24, vi in 0usize..6, steps in 0usize..400) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = NetState::sample_initial(n, &mut rng).unwrap();
        let edges = s.edge_count();
        let model = Model::new(ModelVariant::ALL[vi], (n as f64 / 3.0).min(n as f64 - 1.0), n).unwrap();
        for _ in 0..steps {
            model.step(&mut s, &mut rng);
            prop_assert!(s.audit().is_empty(), "{:?}", s.audit());
            prop_assert_eq!(s.edge_count(), edges);
            prop_assert!(s.placements().iter().all(|b| b.u() != b.v()));
            prop_assert_eq!(s.n0() + s.n1(), n);
        }
    }

    #[test]
    fn flip_is_an_involution(seed in any::<u64>(), n in 2usize..20, v in 0u32..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = NetState::sample_initial(n, &mut rng).unwrap();
        let v = VertexId(v % n as u32);
        let before = (key_of(&s), s.disagreeing_count());
        s.flip_opinion(v).unwrap();
        prop_assert!(s.audit().is_empty());
        s.flip_opinion(v).unwrap();
        prop_assert_eq!((key_of(&s), s.disagreeing_count()), before);
    }

    #[test]
    fn snapshot_round_trips(seed in any::<u64>(), n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = NetState::sample_initial(n, &mut rng).unwrap();
        let back = NetState::from_snapshot(&s.to_snapshot()).unwrap();
        prop_assert_eq!(key_of(&back), key_of(&s));
        prop_assert_eq!(back.t(), s.t());
    }
}
