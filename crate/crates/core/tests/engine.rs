use popsim::adversary::{generate_initial, Adversary, InitKind};
use popsim::engine::{apply_pair, run, step, Configuration, Protocol, RunOptions};
use popsim::protocols::{Cai, LinearState, LinearStateState, LinearTime, LogTime, NextRank, Obs};
use popsim::{detect_correct, detect_silent, pick_pair, Params, RngStream, SimError};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn chi_square_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn ordered_pairs_are_uniform() {
    for (n, draws) in [(3usize, 60_000u64), (5, 100_000), (12, 200_000)] {
        let mut rng = RngStream::new(n as u64);
        let mut counts = vec![0u64; n * n];
        for _ in 0..draws {
            let (i, j) = pick_pair(&mut rng, n).unwrap();
            counts[i * n + j] += 1;
        }
        let off_diagonal: Vec<u64> = (0..n * n).filter(|k| k / n != k % n).map(|k| counts[k]).collect();
        assert_eq!(off_diagonal.len(), n * (n - 1));
        let p = chi_square_p(&off_diagonal);
        assert!(p > 1e-3, "n={n}: p = {p}");
    }
}

#[test]
fn cai_step_example() {
    let p = Cai::new(Params::new(5).unwrap()).unwrap();
    let mut c = Cai::from_ranks(&[3, 3, 1]);
    apply_pair(&p, &mut c, 0, 1, &mut RngStream::new(0)).unwrap();
    assert_eq!(c, Cai::from_ranks(&[3, 4, 1]));

    let p = Cai::new(Params::new(3).unwrap()).unwrap();
    let mut c = Configuration::new(Cai::from_ranks(&[0, 1, 2]));
    let before = c.clone();
    let mut rng = RngStream::new(1);
    for t in 0..20 {
        let ev = step(&p, &mut c, &mut rng, t).unwrap();
        assert_eq!(ev.index, t);
        assert_ne!(ev.initiator, ev.responder);
    }
    assert_eq!(c, before);
}

#[test]
fn invalid_transition_is_a_consistency_error() {
    let p = Cai::new(Params::new(3).unwrap()).unwrap();
    // rank 7 is outside the state space; the interaction leaves it in place
    let mut c = Cai::from_ranks(&[7, 1, 0]);
    let err = apply_pair(&p, &mut c, 0, 1, &mut RngStream::new(0)).unwrap_err();
    assert!(matches!(err, SimError::Consistency(_)));
}

#[test]
fn two_agents_resolve_in_one_step() {
    let p = Cai::new(Params::new(2).unwrap()).unwrap();
    for seed in 0..50 {
        let out = run(&p, Configuration::new(Cai::from_ranks(&[0, 0])), &mut RngStream::new(seed), RunOptions::default())
            .unwrap();
        assert_eq!(out.metrics.silence_interaction, Some(1));
        let mut ranks: Vec<u32> = out.config.iter().map(|s| s.rank).collect();
        ranks.sort();
        assert_eq!(ranks, vec![0, 1]);
    }
}

#[test]
fn cai_worst_mean_is_six_at_three_agents() {
    let p = Cai::new(Params::new(3).unwrap()).unwrap();
    let start = Configuration::new(Cai::from_ranks(&[0, 0, 1]));
    let runs = 10_000;
    let total: u64 = (0..runs)
        .map(|seed| {
            run(&p, start.clone(), &mut RngStream::new(seed), RunOptions::default())
                .unwrap()
                .metrics
                .silence_interaction
                .unwrap()
        })
        .sum();
    let mean = total as f64 / runs as f64;
    assert!((mean - 6.0).abs() < 0.2, "mean {mean}");
}

#[test]
fn empty_horizon_times_out() {
    let params = Params::new(4).unwrap().with_max_interactions(0);
    let p = Cai::new(params).unwrap();
    let out = run(&p, Configuration::new(Cai::from_ranks(&[0, 0, 1, 1])), &mut RngStream::new(0), RunOptions::default())
        .unwrap();
    assert!(out.metrics.timed_out);
    assert_eq!(out.metrics.interactions, 0);
}

#[test]
fn predicates() {
    let p = Cai::new(Params::new(3).unwrap()).unwrap();
    assert!(detect_correct(&p, &Cai::from_ranks(&[2, 0, 1])));
    assert!(detect_silent(&p, &Cai::from_ranks(&[0, 1, 2])).unwrap());

    let p = LinearState::new(Params::new(3).unwrap()).unwrap();
    let c = [
        LinearStateState::settled(1, NextRank::Full),
        LinearStateState::settled(2, NextRank::Full),
        LinearStateState::Unsettled { errorcount: 4 },
    ];
    assert!(!detect_correct(&p, &c));

    let p = LogTime::new(Params::new(3).unwrap()).unwrap();
    let mut c = generate_initial(&p, InitKind::CorrectRanked, &mut RngStream::new(0)).unwrap();
    c[1].rank = 1;
    assert!(!detect_correct(&p, &c));
    assert!(detect_silent(&p, &c).is_err());
}

#[test]
fn parallel_time_is_interactions_over_n() {
    for n in [2usize, 3, 7, 10, 33] {
        let p = LinearState::new(Params::new(n).unwrap()).unwrap();
        let out = run(
            &p,
            generate_initial(&p, InitKind::AllSame, &mut RngStream::new(1)).unwrap(),
            &mut RngStream::new(2),
            RunOptions::default(),
        )
        .unwrap();
        let m = out.metrics;
        assert_eq!(m.parallel_time, m.interactions as f64 / n as f64);
        assert!((m.parallel_time * n as f64 - m.interactions as f64).abs() < 1e-9);
        if let (Some(c), Some(s)) = (m.convergence_interaction, m.silence_interaction) {
            assert!(c <= s);
        }
    }
}

#[test]
fn silent_runs_stop_at_a_silent_correct_configuration() {
    let mut rng = RngStream::new(3);
    for n in [4usize, 9, 16] {
        let params = Params::new(n).unwrap();
        let p = LinearTime::new(params.clone()).unwrap();
        let out = run(
            &p,
            generate_initial(&p, InitKind::GhostRoster, &mut rng).unwrap(),
            &mut rng,
            RunOptions { record_trace: true, ..Default::default() },
        )
        .unwrap();
        assert!(!out.metrics.timed_out);
        assert!(detect_silent(&p, &out.config).unwrap());
        assert!(detect_correct(&p, &out.config));
        let tl = out.timeline.unwrap();
        assert_eq!(tl.len() as u64, out.metrics.interactions + 1);
        assert!(out.metrics.reset_triggers >= 2);

        let p = Obs::new(Params::new(3).unwrap()).unwrap();
        let out = run(&p, generate_initial(&p, InitKind::AllSame, &mut rng).unwrap(), &mut rng, RunOptions::default())
            .unwrap();
        assert!(detect_silent(&p, &out.config).unwrap());
    }
}

#[test]
fn log_time_halts_on_stable_tail() {
    let params = Params::new(8).unwrap();
    let p = LogTime::new(params.clone()).unwrap();
    let mut rng = RngStream::new(4);
    let start = generate_initial(&p, InitKind::StalePhase, &mut rng).unwrap();
    let out = run(&p, start, &mut rng, RunOptions { record_trace: true, halt_on_stable_tail: true }).unwrap();
    let m = out.metrics;
    assert!(m.stable_tail && !m.timed_out);
    assert_eq!(m.silence_interaction, None);
    let conv = popsim::measure_convergence(out.timeline.as_ref().unwrap(), params.tail_margin);
    assert_eq!(conv.convergence_interaction, m.convergence_interaction);
}

fn run_twice<P: Adversary>(p: &P, kind: InitKind, seed: u64) {
    let mut r1 = RngStream::substream(seed, 9);
    let mut r2 = RngStream::substream(seed, 9);
    let c1 = generate_initial(p, kind, &mut r1).unwrap();
    let c2 = generate_initial(p, kind, &mut r2).unwrap();
    let o1 = run(p, c1, &mut r1, RunOptions::default()).unwrap();
    let o2 = run(p, c2, &mut r2, RunOptions::default()).unwrap();
    assert_eq!(o1.config, o2.config);
    assert_eq!(o1.metrics, o2.metrics);
}

#[test]
fn runs_are_deterministic() {
    for seed in 0..5 {
        let params = Params::new(12).unwrap();
        run_twice(&Cai::new(params.clone()).unwrap(), InitKind::UniformRandom, seed);
        run_twice(&LinearTime::new(params.clone()).unwrap(), InitKind::UniformRandom, seed);
        run_twice(&LinearState::new(params.clone()).unwrap(), InitKind::UniformRandom, seed);
        run_twice(&LogTime::new(params.with_max_interactions(5_000)).unwrap(), InitKind::StalePhase, seed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steps_touch_at_most_two_agents(seed in any::<u64>(), n in 2usize..12) {
        let p = LinearState::new(Params::new(n).unwrap()).unwrap();
        let mut rng = RngStream::new(seed);
        let mut c = generate_initial(&p, InitKind::UniformRandom, &mut rng).unwrap();
        for t in 0..200 {
            let before = c.clone();
            let ev = step(&p, &mut c, &mut rng, t).unwrap();
            for k in 0..n {
                if k != ev.initiator && k != ev.responder {
                    prop_assert_eq!(before[k], c[k]);
                }
            }
            for s in c.iter() {
                prop_assert!(p.check_state(s).is_ok());
            }
        }
    }
}
