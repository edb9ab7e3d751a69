use approx::assert_relative_eq;
use lrfim::balance1d::peierls_map;
use lrfim::bounds1d::*;
use lrfim::intervals1d::*;
use lrfim::kernel::*;
use lrfim::Error;
use proptest::prelude::*;

mod common;
use common::oracle_good;

fn sp(m0: f64, delta: f64) -> ScaleParams {
    ScaleParams::new(m0, delta, 10.0).unwrap()
}

#[test]
fn lambda_good_examples() {
    assert!(!is_lambda_good(&[true, false, false, true], 1.9).unwrap());
    assert!(is_lambda_good(&[true, true, false, true], 1.9).unwrap());
    assert!(is_lambda_good(&[true], 1.0).unwrap());
    assert!(is_lambda_good(&[], 1.0).is_err());
}

#[test]
fn lambda_good_matches_oracle() {
    for n in 1..=10usize {
        for mask in 0u32..(1 << n) {
            let bits: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            for lambda in [1.0, 1.9, 3.0] {
                assert_eq!(is_lambda_good(&bits, lambda).unwrap(), oracle_good(&bits, lambda));
            }
        }
    }
}

#[test]
fn sequence_minimum_small_cases() {
    let (min, _, pass) = sequence01_bound_check(4, 1.9).unwrap();
    assert_eq!(min, 3);
    assert!(pass);
    // Independent recomputation through the definition oracle.
    let oracle_min = (0u32..4)
        .map(|m| [true, m & 1 == 1, m & 2 == 2, true])
        .filter(|b| oracle_good(b, 1.9))
        .map(|b| b.iter().filter(|&&x| x).count())
        .min()
        .unwrap();
    assert_eq!(min, oracle_min);
    assert_eq!(sequence01_bound_check(1, 1.0).unwrap().0, 1);
    assert_eq!(sequence01_bound_check(2, 1.0).unwrap().0, 2);
    assert_eq!(sequence01_bound_check(21, 1.0), Err(Error::SizeGuard { size: 21, limit: 20 }));
}

#[test]
fn approximate_interval_exhaustive() {
    for len in 1..=200i64 {
        for a in -300..=300i64 {
            let b = a + len;
            let iv = approximate_interval(a, b).unwrap();
            let (l, r) = (iv.left(), iv.right());
            assert!(l <= a && r >= b, "[{a},{b}) not covered by [{l},{r})");
            assert!(10 * (a - l) <= 7 * len && 10 * (r - b) <= 7 * len, "[{a},{b}) -> [{l},{r})");
        }
    }
    assert!(approximate_interval(3, 3).is_err());
}

#[test]
fn band_level_uses_the_stated_band() {
    for n in 2..=2000i64 {
        let l = band_level(n);
        let p = (1i64 << l) as f64;
        assert!(15.0 / 8.0 * p / 4.0 <= n as f64 && n as f64 <= 15.0 / 8.0 * p / 2.0, "n={n}");
    }
}

#[test]
fn interaction_lower_bound_examples() {
    let k = CouplingKernel::new(1.3, 1).unwrap();
    let cfg = LineConfig::new(0, vec![-1, 1], 1);
    let c = min_interaction_lower_bound_check(0, 2, &cfg, &k);
    assert_eq!(c.value, 1.0);
    assert_relative_eq!(c.bound, 2f64.powf(-1.3));
    assert!(c.pass);
    let tk = TruncatedKernel::new(k, 50).unwrap();
    assert_eq!(set_interaction_lower_bound_check(&[], &tk), Err(Error::EmptySet));
    assert!(set_interaction_lower_bound_check(&[0, 3, 4], &tk).unwrap().pass);
}

#[test]
fn mixed_interaction_matches_double_loop() {
    let k = CouplingKernel::new(1.49, 1).unwrap();
    let spins = vec![1, -1, -1, 1, -1, 1, 1, -1];
    let cfg = LineConfig::new(-3, spins.clone(), 1);
    let mut direct = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            if spins[i] < 0 && spins[j] > 0 {
                direct += (i as f64 - j as f64).abs().powf(-1.49);
            }
        }
    }
    assert_relative_eq!(mixed_interaction(-3, 5, &cfg, &k), direct, max_relative = 1e-12);
}

#[test]
fn theta_is_negative_for_toy_delta() {
    assert!(ThetaParams::new(1.3, 0.25).theta < 0.0);
    assert_relative_eq!(ThetaParams::new(1.3, 0.001).theta, 2f64.ln() / 3.9f64.ln());
}

#[test]
fn balanced_interaction_rejects_unbalanced_or_constant() {
    let k = CouplingKernel::new(1.3, 1).unwrap();
    let p = sp(1.0, 0.25);
    let tp = ThetaParams::new(1.3, 0.25);
    let plus = LineConfig::new(-8, vec![1; 24], 1);
    assert!(matches!(balanced_interaction_check(0, 8, &plus, &p, &tp, 1.0, &k), Err(Error::Precondition(_))));
    let cbar2 = calibrate_cbar2(&k, &p, &tp, 6).unwrap();
    assert!(cbar2 > 0.0);
}

#[test]
fn energy_bound_2_hard_regime_sample() {
    let alpha = 1.3;
    let k = CouplingKernel::new(alpha, 1).unwrap();
    let p = ScaleParams::new(1024.0, 0.001, 10.0).unwrap();
    let r = 2000;
    let win = Window::Interval { lo: -5, len: 11 };
    let model = EnergyModel::new(win, k, r, PairCounting::Unordered).unwrap();
    let tk = TruncatedKernel::new(k, r).unwrap();
    for bits in (0u32..(1 << 11)).filter(|b| b >> 5 & 1 == 1).step_by(7) {
        let spins = (0..11).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
        let sigma = SpinConfiguration::line(-5, spins, 1).unwrap();
        let pr = peierls_map(&sigma, &p).unwrap();
        let e = energy_bound_2_check(&sigma, &pr, &model, &tk).unwrap();
        assert!(e.pass, "bits {bits:b}: {} < {}", e.delta_h, e.j_value);
    }
}

#[test]
fn ratio_checkers_run_on_fig2_stand_in() {
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
    let sigma = SpinConfiguration::line(-256, (-256..200).map(spin).collect(), 1).unwrap();
    let p = sp(1.0, 2.0 / 3.0);
    let pr = peierls_map(&sigma, &p).unwrap();
    let k = CouplingKernel::new(1.3, 1).unwrap();
    let tk = TruncatedKernel::new(k, 1000).unwrap();
    let first = first_interaction_check(&pr, &tk).unwrap();
    assert_eq!(first.checked, 1);
    let fake = fake_expansion_check(&pr).unwrap();
    assert_eq!(fake.violations, 0);
    // M'_l = 0 at these scales, so the far and close checks have nothing to do.
    let (far, close) = flipped_interaction_checks(&pr, &k, 64).unwrap();
    assert_eq!((far.checked, close.checked), (0, 0));
}

#[test]
fn flipped_interaction_checks_large_m() {
    let k = CouplingKernel::new(1.3, 1).unwrap();
    let p = sp(40.0, 0.001);
    let (mut far, mut close) = (RatioReport::default(), RatioReport::default());
    let clusters: [&[i64]; 4] = [&[150], &[150, 151], &[150, 152, 300], &[-60, 150, 151, 153, 300, 301]];
    for extra in clusters {
        let spins = (-100..400).map(|y| if y == 0 || extra.contains(&y) { -1 } else { 1 }).collect();
        let sigma = SpinConfiguration::line(-100, spins, 1).unwrap();
        let pr = peierls_map(&sigma, &p).unwrap();
        let (f, c) = flipped_interaction_checks(&pr, &k, 400).unwrap();
        far.merge(&f);
        close.merge(&c);
    }
    assert!(far.checked > 0 && close.checked > 0);
    assert_eq!(far.violations + close.violations, 0, "far {far:?} close {close:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn set_interaction_bound_random_sets(
        sites in proptest::collection::btree_set(-40i64..40, 1..20),
        alpha in prop_oneof![Just(1.1f64), Just(1.3), Just(1.49)],
    ) {
        let a: Vec<i64> = sites.into_iter().collect();
        let tk = TruncatedKernel::new(CouplingKernel::new(alpha, 1).unwrap(), 4000).unwrap();
        prop_assert!(set_interaction_lower_bound_check(&a, &tk).unwrap().pass);
    }
}
