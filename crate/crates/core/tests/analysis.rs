use popsim::analysis::{epidemic_trial, harmonic, interaction_counts, roll_call, roll_call_trial, summarize};
use popsim::RngStream;

fn epidemic_mean(n: usize, trials: u64, seed: u64) -> f64 {
    let total: u64 = (0..trials)
        .map(|t| epidemic_trial(n, &mut RngStream::substream(seed, t)).unwrap())
        .sum();
    total as f64 / trials as f64
}

#[test]
fn epidemic_three_agents() {
    let mean = epidemic_mean(3, 100_000, 1);
    assert!((mean - 3.0).abs() < 0.05, "mean {mean}");
}

#[test]
fn epidemic_means_follow_harmonic_formula() {
    for n in [8usize, 32, 100] {
        let mean = epidemic_mean(n, 10_000, n as u64);
        let exact = (n - 1) as f64 * harmonic(n as u64 - 1);
        assert!((mean / exact - 1.0).abs() < 0.05, "n={n}: {mean} vs {exact}");
    }
}

#[test]
fn epidemic_tail_is_thin() {
    let n = 64usize;
    let trials = 20_000u64;
    let bound = 3.0 * n as f64 * (n as f64).ln();
    let over = (0..trials)
        .filter(|&t| epidemic_trial(n, &mut RngStream::substream(3, t)).unwrap() as f64 > bound)
        .count() as f64;
    let p = 1.0 / (n * n) as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!(over / trials as f64 <= p + 3.0 * sigma, "{over} of {trials}");
}

#[test]
fn roll_call_completes_every_id() {
    let mut rng = RngStream::new(9);
    for n in [5usize, 64, 200] {
        for _ in 0..20 {
            let r = roll_call(n, &mut rng).unwrap();
            assert_eq!(r.total, *r.per_id.iter().max().unwrap());
        }
    }
    let n = 128;
    let trials = 200;
    let total: u64 = (0..trials).map(|t| roll_call_trial(n, &mut RngStream::substream(4, t)).unwrap()).sum();
    let ratio = total as f64 / trials as f64 / (n as f64 * (n as f64).ln());
    assert!(ratio > 1.2 && ratio < 1.8, "ratio {ratio}");
}

#[test]
fn local_interaction_counts_stay_logarithmic() {
    let n = 256usize;
    let ln = (n as f64).ln();
    let window = (3.0 * n as f64 * ln) as u64;
    let mut low = 0;
    let mut high = 0;
    let windows = 50;
    for w in 0..windows {
        let counts = interaction_counts(n, window, &mut RngStream::substream(8, w)).unwrap();
        low += counts.iter().filter(|&&c| (c as f64) < ln).count();
        high += counts.iter().filter(|&&c| (c as f64) > 12.0 * ln).count();
    }
    // about 1/n per agent and window, with slack
    let allowed = 3 * windows as usize + 10;
    assert!(low <= allowed, "{low} agents below ln n");
    assert!(high <= allowed, "{high} agents above 12 ln n");
}

#[test]
fn summary_order_statistics() {
    let xs: Vec<f64> = (1..=100).map(|i| i as f64).collect();
    let s = summarize(&xs).unwrap();
    assert_eq!((s.p50, s.p90, s.p99, s.min, s.max), (50.0, 90.0, 99.0, 1.0, 100.0));
    assert!((s.mean - 50.5).abs() < 1e-12);
    assert!(s.variance >= 0.0);
}
