use lrfim::disorder::*;
use lrfim::kernel::{CouplingKernel, EnergyModel, PairCounting, Window};
use lrfim::Error;

fn model_1d(lo: i64, len: usize, cutoff: i64) -> EnergyModel {
    EnergyModel::new(Window::Interval { lo, len }, CouplingKernel::new(1.3, 1).unwrap(), cutoff, PairCounting::Unordered).unwrap()
}

/// Naive log Z: direct energies, direct log-sum-exp.
fn oracle_log_z(m: &EnergyModel, beta: f64, h: &[f64], eps: f64) -> f64 {
    let n = m.size();
    let ws: Vec<f64> = (0..1usize << n)
        .map(|c| {
            let spins: Vec<i8> = (0..n).map(|i| if c >> i & 1 == 1 { -1 } else { 1 }).collect();
            -beta * m.energy(&spins, 1, eps, Some(h))
        })
        .collect();
    let max = ws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + ws.iter().map(|w| (w - max).exp()).sum::<f64>().ln()
}

#[test]
fn field_is_reproducible_and_centred() {
    assert_eq!(sample_field(50, 9, 1.0), sample_field(50, 9, 1.0));
    assert_ne!(sample_field(50, 9, 1.0).values, sample_field(50, 10, 1.0).values);
    let f = sample_field(1_000_000, 1, 1.0);
    let mean = f.values.iter().sum::<f64>() / 1e6;
    let var = f.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 1e6;
    assert!(mean.abs() < 0.004, "{mean}");
    assert!((var - 1.0).abs() < 4.0 * (2.0f64 / 1e6).sqrt(), "{var}");
}

#[test]
fn field_term_is_linear_in_epsilon() {
    let m = model_1d(0, 5, 100);
    let h = sample_field(5, 3, 1.0).values;
    let s = [1i8, -1, -1, 1, -1];
    let e0 = m.energy(&s, 1, 0.0, None);
    let e1 = m.energy(&s, 1, 1.0, Some(&h)) - e0;
    let e3 = m.energy(&s, 1, 3.0, Some(&h)) - e0;
    assert!((e3 - 3.0 * e1).abs() < 1e-12);
}

#[test]
fn log_partition_examples() {
    let m = model_1d(0, 6, 200);
    let zero = ExactGibbs::new(m.clone(), 0.0).unwrap();
    assert!((zero.log_partition(None, 0.0) - 6.0 * 2f64.ln()).abs() < 1e-12);
    let single = model_1d(0, 1, 200);
    let b = single.boundary[0];
    let g = ExactGibbs::new(single, 0.7).unwrap();
    assert!((g.log_partition(None, 0.0) - (2.0 * (0.7 * b).cosh()).ln()).abs() < 1e-12);
    for seed in 0..5 {
        let h = sample_field(6, seed, 1.0).values;
        let g = ExactGibbs::new(m.clone(), 1.3).unwrap();
        let got = g.log_partition(Some(&h), 0.8);
        assert!((got - oracle_log_z(&m, 1.3, &h, 0.8)).abs() < 1e-9, "{seed}");
    }
    let big = model_1d(0, 23, 200);
    assert_eq!(ExactGibbs::new(big, 1.0).err(), Some(Error::SizeGuard { size: 23, limit: 22 }));
}

#[test]
fn log_partition_in_two_dimensions() {
    let m = EnergyModel::new(Window::Box { lo: (0, 0), w: 3, h: 3 }, CouplingKernel::new(3.0, 2).unwrap(), 40, PairCounting::Ordered).unwrap();
    let g = ExactGibbs::new(m.clone(), 0.6).unwrap();
    let h = sample_field(9, 4, 1.0).values;
    assert!((g.log_partition(Some(&h), 0.5) - oracle_log_z(&m, 0.6, &h, 0.5)).abs() < 1e-9);
    let p = g.probabilities(Some(&h), 0.5);
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn delta_examples_and_antisymmetry() {
    let m = model_1d(-6, 12, 300);
    let g = ExactGibbs::new(m.clone(), 1.0).unwrap();
    let a: Vec<usize> = (0..6).collect();
    assert_eq!(g.delta_a(&[0.0; 12], 1.0, &a).unwrap(), 0.0);
    let h = sample_field(12, 5, 1.0).values;
    assert_eq!(g.delta_a(&h, 1.0, &[]).unwrap(), 0.0);
    let d = g.delta_a(&h, 1.0, &a).unwrap();
    let direct = -(oracle_log_z(&m, 1.0, &h, 1.0) - oracle_log_z(&m, 1.0, &tau(&h, &a), 1.0));
    assert!((d - direct).abs() < 1e-9);
    let back = g.delta_a(&tau(&h, &a), 1.0, &a).unwrap();
    assert!((back + d).abs() < 1e-9);
    assert!(matches!(g.delta_a(&h, 1.0, &[12]), Err(Error::Precondition(_))));
}

#[test]
fn joint_flip_preserves_field_term() {
    let m = model_1d(0, 8, 100);
    let h = sample_field(8, 2, 1.0).values;
    let a = [1usize, 2, 5];
    for c in 0u32..256 {
        let s: Vec<i8> = (0..8).map(|i| if c >> i & 1 == 1 { -1 } else { 1 }).collect();
        let mut t = s.clone();
        for &i in &a {
            t[i] = -t[i];
        }
        let f = |sp: &[i8], hh: &[f64]| m.energy(sp, 1, 1.0, Some(hh)) - m.energy(sp, 1, 0.0, None);
        assert!((f(&s, &h) - f(&t, &tau(&h, &a))).abs() < 1e-12);
    }
}

#[test]
fn delta_is_cutoff_insensitive_for_interior_sets() {
    let h = sample_field(10, 8, 1.0).values;
    let a = [4usize, 5];
    let d1 = ExactGibbs::new(model_1d(0, 10, 200), 1.0).unwrap().delta_a(&h, 0.5, &a).unwrap();
    let d2 = ExactGibbs::new(model_1d(0, 10, 400), 1.0).unwrap().delta_a(&h, 0.5, &a).unwrap();
    assert!((d1 - d2).abs() < 0.02 * d1.abs().max(0.1), "{d1} {d2}");
}

#[test]
fn tail_examples() {
    let g = ExactGibbs::new(model_1d(-6, 12, 300), 1.0).unwrap();
    let a: Vec<usize> = (0..6).collect();
    let same = tail_check(&g, &a, &a, 0.5, 0.1, 200, 1).unwrap();
    assert_eq!(same.empirical, 0.0);
    assert!(same.pass);
    let a2: Vec<usize> = (0..10).collect();
    let vac = tail_check(&g, &a, &(0..2).collect::<Vec<_>>(), 0.5, 2.0, 500, 1).unwrap();
    assert!(vac.bound > 1.0 && vac.pass);
    let r = tail_check(&g, &a, &[a.clone(), vec![6, 7]].concat(), 0.2, 1.0, 5000, 3).unwrap();
    assert!(r.pass, "{r:?}");
    let r = tail_check(&g, &a, &a2, 0.2, 1.0, 5000, 4).unwrap();
    assert!(r.pass, "{r:?}");
    let big = ExactGibbs::new(model_1d(0, 15, 300), 1.0).unwrap();
    assert!(matches!(tail_check(&big, &[0], &[1], 1.0, 1.0, 10, 0), Err(Error::SizeGuard { .. })));
}

#[test]
fn good_event_trends() {
    let m = model_1d(0, 10, 300);
    let g = ExactGibbs::new(m.clone(), 1.0).unwrap();
    let sets: Vec<Vec<usize>> = vec![vec![4], vec![3, 4, 5], (2..8).collect()];
    let fam = family_1d(&m, &sets);
    assert!(good_event_eval(&g, &[0.0; 10], 1.0, &fam).unwrap());
    let freqs: Vec<f64> = [0.01, 0.5, 2.0, 8.0].iter().map(|&e| good_event_frequency(&g, e, &fam, 200, 0).unwrap()).collect();
    assert_eq!(freqs[0], 1.0);
    assert!(freqs.windows(2).all(|w| w[0] >= w[1]), "{freqs:?}");
    assert!(freqs[3] < 1.0);
    let fam2 = family_2d(&[(vec![4], 4, 0.0)], 0.5);
    assert!((fam2[0].1 - 0.5).abs() < 1e-15);
}
