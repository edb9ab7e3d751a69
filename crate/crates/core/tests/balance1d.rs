use lrfim::balance1d::*;
use lrfim::intervals1d::*;
use lrfim::kernel::SpinConfiguration;
use lrfim::Error;
use proptest::prelude::*;

mod common;
use common::oracle_balancing;

fn sp(m0: f64, delta: f64) -> ScaleParams {
    ScaleParams::new(m0, delta, 10.0).unwrap()
}

fn fig2_config() -> SpinConfiguration {
    let spin = |y: i64| -> i8 {
        if (-200..-192).contains(&y) {
            -1
        } else if (16..32).contains(&y) || (80..88).contains(&y) {
            1
        } else if (-128..160).contains(&y) {
            -1
        } else {
            1
        }
    };
    SpinConfiguration::line(-256, (-256..200).map(spin).collect(), 1).unwrap()
}

#[test]
fn all_plus_has_empty_trace() {
    let sigma = SpinConfiguration::line(-8, vec![1; 17], 1).unwrap();
    let pr = peierls_map(&sigma, &sp(1.0, 0.25)).unwrap();
    assert!(pr.trace.is_empty());
    assert!(pr.a_sigma.is_empty());
    assert_eq!(pr.i_sigma, None);
}

#[test]
fn rejects_minus_boundary_and_missing_origin() {
    let p = sp(1.0, 0.25);
    let minus_bc = SpinConfiguration::line(-2, vec![1; 5], -1).unwrap();
    assert_eq!(run_balancing(&minus_bc, &p), Err(Error::NotPlusBoundary));
    let no_origin = SpinConfiguration::line(3, vec![1; 5], 1).unwrap();
    assert!(matches!(run_balancing(&no_origin, &p), Err(Error::Precondition(_))));
}

#[test]
fn fig2_stand_in_trace() {
    let p = sp(1.0, 2.0 / 3.0);
    let sigma = fig2_config();
    let pr = peierls_map(&sigma, &p).unwrap();
    let tr = &pr.trace;
    let got: Vec<(u32, i64, Direction)> = tr
        .steps
        .iter()
        .map(|s| (s.interval.level, s.interval.left(), s.direction))
        .collect();
    assert_eq!(
        got,
        vec![
            (3, -200, Direction::ToPlus),
            (3, 80, Direction::ToMinus),
            (4, 16, Direction::ToMinus),
        ]
    );
    // The level-4 interval only becomes isolated once its neighbour is cleaned.
    let i4 = tr.steps[2].interval;
    assert!(!is_isolated(i4, &tr.config_at(1), &p, false));
    assert!(is_isolated(i4, &tr.config_at(2), &p, false));
    assert_eq!(tr.to_text(), "3 -392 to_plus 8\n3 168 to_minus 8\n4 24 to_minus 16\n");
    let i_sigma = pr.i_sigma.unwrap();
    assert_eq!(i_sigma.level, 9);
    assert!(i_sigma.contains(0));
    assert!(isolation(i_sigma, &tr.final_config, &p, false).plus);
    assert_eq!(pr.a_sigma, (-128..160).collect::<Vec<_>>());
}

#[test]
fn single_minus_at_five() {
    let p = sp(1.0, 0.25);
    let mut spins = vec![1; 17];
    spins[13] = -1;
    let sigma = SpinConfiguration::line(-8, spins.clone(), 1).unwrap();
    let tr = run_balancing(&sigma, &p).unwrap();
    let first = tr.steps[0].interval;
    let cfg = LineConfig::new(-8, spins, 1);
    let smallest = (0..=8u32)
        .find_map(|l| {
            intervals_meeting(l, 5, 6).find(|iv| isolation(*iv, &cfg, &p, false).plus)
        })
        .unwrap();
    assert_eq!(first, smallest);
    assert_eq!((first.level, first.left()), (0, 5));
    assert!(tr.final_config.spins.iter().all(|&s| s == 1));
}

#[test]
fn singleton_volume() {
    let p = sp(1.0, 0.25);
    let sigma = SpinConfiguration::line(0, vec![-1], 1).unwrap();
    let pr = peierls_map(&sigma, &p).unwrap();
    assert!(pr.trace.is_empty());
    assert_eq!(pr.a_sigma, vec![0]);
}

#[test]
fn exhaustive_small_volume_properties() {
    let p = sp(1.0, 0.25);
    for bits in 0u32..(1 << 11) {
        let spins: Vec<i8> = (0..11).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
        let sigma = SpinConfiguration::line(-5, spins.clone(), 1).unwrap();
        let pr = peierls_map(&sigma, &p).unwrap();
        assert_eq!(repeated_selections(&pr.trace), 0);
        assert!(frozen_core_violations(&pr.trace).is_empty());
        if spins[5] == -1 {
            assert!(pr.i_sigma.is_some());
            assert!(pr.a_sigma.contains(&0));
            assert!(pr.a_sigma.iter().all(|y| (-5..=5).contains(y)));
        }
    }
}

#[test]
fn tameness() {
    let p = sp(1.0, 0.25);
    let sigma = SpinConfiguration::line(-40, vec![1; 81], 1).unwrap();
    let mut tr = run_balancing(&sigma, &p).unwrap();
    assert!(check_tame(0, 10, &tr, 0));
    tr.steps.push(Step {
        interval: DyadicInterval::from_left(5, 0),
        direction: Direction::ToPlus,
        flipped: vec![],
    });
    assert!(check_tame(100, 132, &tr, 1));
    // |I ∩ B_0^c| = 1 = |I| / 32.
    assert!(!check_tame(-1, 31, &tr, 1));
    assert!(check_tame(-1, 31, &tr, 0));
    assert!(check_tame(-2, 30, &tr, 1));
}

#[test]
fn step_budget_and_levels() {
    assert_eq!(max_level(11), 9);
    assert_eq!(max_level(1), 5);
    assert!(step_budget(11) >= 64 * 11 * 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn trace_matches_naive_oracle(
        bits in proptest::collection::vec(any::<bool>(), 1..13),
        shift in 0usize..12,
        m0 in prop_oneof![Just(1.0f64), Just(1.5), Just(3.0), Just(16.0)],
        delta in prop_oneof![Just(0.25f64), Just(1.0 / 3.0), Just(2.0 / 3.0)],
    ) {
        let n = bits.len();
        let lo = -((shift % n) as i64);
        let spins: Vec<i8> = bits.iter().map(|&b| if b { -1 } else { 1 }).collect();
        let p = sp(m0, delta);
        let sigma = SpinConfiguration::line(lo, spins.clone(), 1).unwrap();
        let tr = run_balancing(&sigma, &p).unwrap();
        let got: Vec<(u32, i64, bool)> = tr
            .steps
            .iter()
            .map(|s| (s.interval.level, s.interval.left(), s.direction == Direction::ToPlus))
            .collect();
        let (want, fin) = oracle_balancing(lo, &spins, &|l| p.m(l), 10.0);
        prop_assert_eq!(got, want);
        prop_assert_eq!(&tr.final_config.spins, &fin);
    }
}
