//! Summation-policy checks: the empirical convergence gate, shell decay,
//! and determinism of the ordered reduction across worker counts.

use penumbra::rademacher::{self, RademacherSpec};

#[test]
fn constant_term_converges_under_doubling() {
    // doubling c_max from 2048 to 4096 moves the (0, 0) coefficient by
    // less than 0.05
    let at = |c_max: u64| {
        let spec = RademacherSpec::new(1, -3, 1, 1, 1, 1, c_max);
        rademacher::coefficient(&spec, 0, 0).unwrap()
    };
    let a = at(2048);
    let b = at(4096);
    assert!((a - b).abs() < 0.05, "|{a} - {b}| = {}", (a - b).abs());
}

#[test]
fn shell_contributions_decay_in_windows() {
    // per-shell contributions oscillate, so the decay diagnostic compares
    // dyadic windows: the window maximum decreases beyond a burn-in
    let spec = RademacherSpec::new(1, -3, 1, 1, 1, 1, 512);
    let profile = rademacher::shell_profile(&spec, 4, 0).unwrap();
    let window_max = |lo: i64, hi: i64| {
        profile
            .iter()
            .filter(|(c, _)| *c >= lo && *c < hi)
            .map(|(_, v)| *v)
            .fold(0.0f64, f64::max)
    };
    let mut prev = f64::INFINITY;
    for k in 3..9 {
        let w = window_max(1 << k, 1 << (k + 1));
        assert!(w < prev, "window [{}, {}) grew: {w} >= {prev}", 1 << k, 1 << (k + 1));
        prev = w;
    }
}

#[test]
fn reduction_is_identical_across_worker_counts() {
    let spec = RademacherSpec::new(3, -3, 3, 1, 1, 1, 200);
    let targets = [(0i64, 0u64), (12, 0), (13, 1)];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| rademacher::coefficients(&spec, &targets).unwrap().raw)
    };
    let one = run(1);
    let four = run(4);
    for key in one.keys() {
        assert_eq!(one[key].to_bits(), four[key].to_bits(), "bitwise at {key:?}");
    }
}
