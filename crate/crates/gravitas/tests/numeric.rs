use gravitas::numeric::*;
use gravitas::rng::{mc_estimate, mc_mean, RngStream, CHUNK};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn kahan_recovers_small_terms() {
    let mut k = KahanSum::new();
    k.add(1e16);
    for _ in 0..1000 {
        k.add(1.0);
    }
    k.add(-1e16);
    assert_eq!(k.value(), 1000.0);
}

#[test]
fn gauss_kronrod_integrates_smooth_and_peaked() {
    let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, QuadOptions::default());
    assert!((q.value - 2.0).abs() < 1e-12);
    let a = 1e-4;
    let q = integrate_breaks(|x: f64| a / (x * x + a * a), &[-1.0, 0.0, 1.0], QuadOptions::default());
    assert!((q.value - 2.0 * (1.0 / a).atan()).abs() < 1e-9);
}

#[test]
fn bisect_finds_root_and_rejects_no_bracket() {
    let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
    assert!((r - 2f64.sqrt()).abs() < 1e-12);
    assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
}

#[test]
fn linear_extrapolation_is_exact_on_lines() {
    assert!((extrapolate_linear(0.1, 3.2, 0.01, 3.02) - 3.0).abs() < 1e-12);
    assert!((log_log_slope(&[1.0, 10.0, 100.0], &[2.0, 200.0, 20000.0]) - 2.0).abs() < 1e-12);
}

#[test]
fn uniform_mean_and_error() {
    let e = mc_mean(100_000, RngStream::new(1, 0), |r| r.random::<f64>());
    assert!((e.mean - 0.5).abs() < 4.0 * e.std_error);
    assert!((e.std_error - (1.0f64 / 12.0 / 1e5).sqrt()).abs() < 1e-5);
}

fn in_pool<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn monte_carlo_is_thread_count_independent() {
    let n = 5 * CHUNK + 17;
    let f = |r: &mut gravitas::rng::StreamRng| {
        let x: f64 = r.random();
        [x, x * x]
    };
    let one = in_pool(1, || mc_estimate::<2, _>(n, RngStream::new(9, 3), f));
    let many = in_pool(7, || mc_estimate::<2, _>(n, RngStream::new(9, 3), f));
    for (a, b) in one.iter().zip(&many) {
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }
}

#[test]
fn derived_streams_differ() {
    let s = RngStream::new(1, 0);
    let a: u64 = s.derive(1).rng().random();
    let b: u64 = s.derive(2).rng().random();
    let c: u64 = s.rng().random();
    assert!(a != b && a != c && b != c);
}

proptest! {
    #[test]
    fn kahan_merge_matches_sequential(xs in prop::collection::vec(-1e6f64..1e6, 1..200), split in 0usize..200) {
        let split = split.min(xs.len());
        let mut all = KahanSum::new();
        xs.iter().for_each(|x| all.add(*x));
        let (mut a, mut b) = (KahanSum::new(), KahanSum::new());
        xs[..split].iter().for_each(|x| a.add(*x));
        xs[split..].iter().for_each(|x| b.add(*x));
        a.merge(&b);
        prop_assert!((a.value() - all.value()).abs() <= 1e-9 * xs.iter().map(|x| x.abs()).sum::<f64>().max(1.0));
    }
}
