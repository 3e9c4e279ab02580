use moran_core::chains::{
    hitting_time, ruin_probability, skeleton_hitting_time, symmetric_ruin_probability, SkeletonWalk, YChain,
};
use moran_core::experiments::quantile;
use moran_core::rng;
use proptest::prelude::*;

#[test]
fn chain_step_frequencies() {
    let (n, s, k) = (20usize, 2.0, 6usize);
    let draws = 200_000u32;
    let t = YChain::new(n, s, k).unwrap().transition();
    let mut g = rng::from_seed(8);
    let (mut up, mut down) = (0u32, 0u32);
    for _ in 0..draws {
        let mut c = YChain::new(n, s, k).unwrap();
        match c.step(&mut g) {
            1 => up += 1,
            -1 => down += 1,
            _ => {}
        }
    }
    for (count, p) in [(up, t.up), (down, t.down)] {
        let se = (p * (1.0 - p) / f64::from(draws)).sqrt();
        assert!((f64::from(count) / f64::from(draws) - p).abs() < 4.0 * se);
    }
}

#[test]
fn skeleton_drift() {
    for s in [0.5, 1.0, 4.0] {
        let steps = 100_000u64;
        let start = 1_000_000usize;
        let mut walk = SkeletonWalk::new(2 * start, s, start).unwrap();
        let mut g = rng::from_seed(12);
        for _ in 0..steps {
            walk.step(&mut g);
        }
        let drift = s / (2.0 + s);
        let slope = (walk.current() as f64 - start as f64) / steps as f64;
        let se = ((1.0 - drift * drift) / steps as f64).sqrt();
        assert!((slope - drift).abs() < 3.0 * se, "s = {s}: slope {slope}, drift {drift}");
    }
}

#[test]
fn ruin_matches_monte_carlo() {
    for (s, start, high) in [(1.0, 10usize, 100usize), (0.1, 5, 20)] {
        let runs = 10_000u32;
        let p = ruin_probability(s, start as i64, 0, high as i64).unwrap();
        let mut g = rng::from_seed(31);
        let mut wins = 0u32;
        for _ in 0..runs {
            let mut walk = SkeletonWalk::new(high, s, start).unwrap();
            let rec = skeleton_hitting_time(&mut walk, high, u64::MAX, &mut g);
            wins += u32::from(rec.hit);
        }
        let se = (p * (1.0 - p) / f64::from(runs)).sqrt().max(1.0 / f64::from(runs));
        let freq = f64::from(wins) / f64::from(runs);
        assert!((freq - p).abs() < 4.0 * se, "s = {s}: {freq} vs {p}");
    }
}

#[test]
fn fixation_probability_grows_with_n() {
    let mut last = 0.0;
    for n in [20i64, 100, 1000, 10_000] {
        let p = ruin_probability(1.0, n / 10, 0, n).unwrap();
        assert!(p >= last);
        last = p;
    }
    assert!(1.0 - last < 1e-15);
    assert_eq!(symmetric_ruin_probability(3, 0, 6).unwrap(), 0.5);
}

#[test]
fn hitting_time_is_linear_in_n() {
    let n = 1000;
    let mut times = Vec::new();
    for r in 0..100 {
        let mut g = rng::replicate_rng(77, 0, r);
        let mut c = YChain::new(n, 1.0, 10).unwrap();
        let rec = hitting_time(&mut c, n / 2, 100 * (n as u64).pow(2), &mut g);
        assert!(!rec.horizon_exceeded());
        if rec.hit {
            times.push(rec.steps as f64);
        }
    }
    let median = quantile(&times, 0.5);
    assert!(median > 0.1 * n as f64 && median < 100.0 * n as f64, "median {median}");
}

proptest! {
    #[test]
    fn ruin_is_monotone_and_bounded(
        s in 0.01f64..20.0,
        ds in 0.01f64..5.0,
        low in -50i64..0,
        gap in 2i64..200,
        offset in 1i64..1000,
    ) {
        let high = low + gap;
        let start = low + 1 + offset % (gap - 1);
        let p = ruin_probability(s, start, low, high).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(ruin_probability(s + ds, start, low, high).unwrap() >= p);
        if start + 1 < high {
            prop_assert!(ruin_probability(s, start + 1, low, high).unwrap() >= p);
        }
    }
}
