use lrfim::calibration;
use lrfim::coarse2d::*;
use lrfim::contour2d::SiteSet;
use lrfim::kernel::{CouplingKernel, TruncatedKernel};
use lrfim::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tk(alpha: f64) -> TruncatedKernel {
    TruncatedKernel::new(CouplingKernel::new(alpha, 2).unwrap(), 256).unwrap()
}

fn grid() -> CubeGrid {
    CubeGrid::new(5).unwrap()
}

fn block(x0: i64, x1: i64, y0: i64, y1: i64) -> SiteSet {
    (x0..x1).flat_map(|x| (y0..y1).map(move |y| (x, y))).collect()
}

/// Direct count of adjacent (in, out) pairs.
fn oracle_boundary(s: &CubeSet) -> usize {
    let mut n = 0;
    for &(x, y) in s {
        for n2 in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            n += usize::from(!s.contains(&n2));
        }
    }
    n
}

fn random_set(rng: &mut ChaCha8Rng, side: i64) -> SiteSet {
    // Union of a few rectangles plus sprinkled noise.
    let mut a = SiteSet::new();
    for _ in 0..rng.random_range(1..4) {
        let (x, y) = (rng.random_range(0..side), rng.random_range(0..side));
        let (w, h) = (rng.random_range(1..side), rng.random_range(1..side));
        a.extend(block(x, (x + w).min(side), y, (y + h).min(side)));
    }
    for _ in 0..rng.random_range(0..40) {
        a.insert((rng.random_range(0..side), rng.random_range(0..side)));
    }
    a
}

#[test]
fn grid_geometry() {
    assert_eq!(CubeGrid::new(4), Err(Error::InvalidParams("r must exceed 4, got 4".into())));
    let g = grid();
    assert_eq!(g.side(1), 32);
    assert_eq!(g.cube_of((-1, 31), 1), (-1, 0));
    assert!(g.shrunk_cube((0, 0), 0).is_empty());
    let hat = g.shrunk_cube((0, 0), 1);
    assert_eq!(hat.len(), 30 * 30);
    assert!(hat.contains(&(1, 1)) && hat.contains(&(30, 30)) && !hat.contains(&(0, 5)) && !hat.contains(&(31, 5)));
    assert_eq!(g.shrunk_bounds((1, 0), 2), Some((1024 + 32, 2048 - 32, 32, 1024 - 32)));
}

#[test]
fn admissible_means_half_full() {
    let g = grid();
    let half = block(0, 16, 0, 32);
    assert_eq!(admissible_cubes(&half, 1, &g).len(), 1);
    let mut short = half.clone();
    short.remove(&(0, 0));
    assert!(admissible_cubes(&short, 1, &g).is_empty());
    assert_eq!(admissible_cubes(&short, 0, &g).len(), short.len());
}

#[test]
fn edge_boundary_counts() {
    let one: CubeSet = [(0, 0)].into();
    assert_eq!(edge_boundary(&one).len(), 4);
    let square: CubeSet = [(0, 0), (0, 1), (1, 0), (1, 1)].into();
    assert_eq!(edge_boundary(&square).len(), 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let s: CubeSet = (0..rng.random_range(1..20)).map(|_| (rng.random_range(0..6), rng.random_range(0..6))).collect();
        assert_eq!(edge_boundary(&s).len(), oracle_boundary(&s));
        assert_eq!(reconstruct_from_boundary(&edge_boundary(&s)), s);
    }
}

#[test]
fn level_zero_interaction_vanishes() {
    let a = block(0, 5, 0, 5);
    assert_eq!(level_interaction(&a, 0, &grid(), &tk(3.0)), 0.0);
}

#[test]
fn half_cube_pair_interaction_oracle() {
    // A fills the left cube; the right neighbour is empty. Q_1 has one nonzero pair.
    let g = grid();
    let t = tk(3.0);
    let a = block(0, 32, 0, 32);
    let adm = admissible_cubes(&a, 1, &g);
    let edges = edge_boundary(&adm);
    assert_eq!(edges.len(), 4);
    let inside: Vec<_> = block(1, 31, 1, 31).into_iter().collect();
    let right: Vec<_> = block(33, 63, 1, 31).into_iter().collect();
    let direct: f64 = inside
        .iter()
        .map(|&(x0, x1)| right.iter().map(|&(y0, y1)| t.kernel.j2(x0 - y0, x1 - y1)).sum::<f64>())
        .sum();
    let got = pair_interaction(&a, ((0, 0), (1, 0)), 1, &g, &t);
    assert!((got - direct).abs() < 1e-9 * direct);
    let q = level_interaction(&a, 1, &g, &t);
    assert!((q - 4.0 * direct).abs() < 1e-9 * q);
}

#[test]
fn b_constants() {
    assert!((b6(3.0) - 1.0 / 432.0).abs() < 1e-15);
    // Large-int bound at l = 1, alpha = 3: b6 2^5 = 2/27.
    assert!((b6(3.0) * 32.0 - 2.0 / 27.0).abs() < 1e-15);
    assert!((b7(3.0, 5) - 432.0 * 2048.0).abs() < 1e-6);
}

#[test]
fn no_overlap_and_large_int_on_random_sets() {
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for alpha in [2.5, 3.0] {
        let t = tk(alpha);
        for _ in 0..10 {
            let a = random_set(&mut rng, 64);
            let c = no_overlap_check(&a, &g, &t);
            assert!(c.pass, "{c:?}");
            for chk in large_int_check(&a, 1, &g, &t).unwrap() {
                assert!(chk.pass, "{chk:?}");
            }
            for lvl in ffs_checks(&a, &g, &t) {
                assert!(lvl.pass_i && lvl.pass_ii, "{lvl:?}");
            }
        }
    }
    assert!(large_int_check(&block(0, 2, 0, 2), 0, &g, &tk(3.0)).is_err());
}

#[test]
fn nesting_is_clean() {
    let (checked, bad) = nesting_violations(&grid(), 2).unwrap();
    assert!(checked > 0);
    assert_eq!(bad, 0);
}

#[test]
fn isoperimetry_exhaustive_small_grids() {
    for n in [3i64, 4] {
        let cells: Vec<(i64, i64)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
        let mut checked = 0;
        for mask in 0u32..(1 << cells.len()) {
            let s: CubeSet = cells.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &c)| c).collect();
            let t: CubeSet = cells.iter().copied().filter(|c| !s.contains(c)).collect();
            let small = s.len().min(t.len());
            if small == 0 {
                continue;
            }
            let c = (small as f64 / (n * n) as f64).min(0.5);
            let chk = iso_check(&s, &t, n, c).unwrap();
            assert!(chk.pass, "{n} {mask:b} {chk:?}");
            let (b, bound) = isoperimetric_ingredient(&s);
            assert!(b as f64 >= bound - 1e-12);
            checked += 1;
        }
        assert!(checked > 0);
    }
    let s: CubeSet = [(0, 0)].into();
    let t: CubeSet = [(0, 1), (1, 0), (1, 1)].into();
    assert!(matches!(iso_check(&s, &t, 2, 0.5), Err(Error::Precondition(_))));
    assert!(matches!(iso_check(&s, &CubeSet::new(), 2, 0.25), Err(Error::Precondition(_))));
}

#[test]
fn mixing_single_minus_matches_corner_sum() {
    let k = CouplingKernel::new(3.0, 2).unwrap();
    let side = 32i64;
    let corner: f64 = (0..side).flat_map(|x| (0..side).map(move |y| (x, y))).filter(|&p| p != (0, 0)).map(|(x, y)| k.j2(x, y)).sum();
    let p = cube_mixing_bound_probe(32, 1, &k, 20, 2, 5).unwrap();
    assert!((p.min_j - corner).abs() < 1e-9 * corner, "{} vs {corner}", p.min_j);
    assert_eq!(cube_mixing_bound_probe(32, 0, &k, 1, 1, 0).unwrap().min_j, 0.0);
    assert!(cube_mixing_bound_probe(30, 1, &k, 1, 1, 0).is_err());
}

#[test]
fn mixing_energy_matches_direct_sum() {
    let k = CouplingKernel::new(3.0, 2).unwrap();
    let ann = MixingAnnealer::new(8, &k).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let minus: Vec<bool> = (0..64).map(|_| rng.random_bool(0.3)).collect();
    let mut direct = 0.0;
    for a in 0..64i64 {
        for b in 0..64i64 {
            if minus[a as usize] && !minus[b as usize] {
                direct += k.j2(a / 8 - b / 8, a % 8 - b % 8);
            }
        }
    }
    assert!((ann.mixing(&minus) - direct).abs() < 1e-9 * direct);
    let (e, best) = ann.anneal(minus.clone(), 30, 1.0, 0.01, &mut rng);
    assert_eq!(best.iter().filter(|&&b| b).count(), minus.iter().filter(|&&b| b).count());
    assert!(e <= direct + 1e-9);
    assert!((ann.mixing(&best) - e).abs() < 1e-9);
}

#[test]
fn fit_recovers_exact_curve() {
    let probes: Vec<MixingProbe> = [1usize, 4, 16]
        .iter()
        .map(|&m| {
            let curve = ((m + 1) as f64).sqrt() * ((m + 1) as f64).ln();
            MixingProbe { m, min_j: 2.5 * curve, curve }
        })
        .collect();
    let f = fit_mixing(&probes).unwrap();
    assert!((f.c - 2.5).abs() < 1e-12 && f.residual < 1e-12 && (f.floor - 2.5).abs() < 1e-12);
}

#[test]
fn bundled_b8_floor_is_present() {
    let v = calibration::bundled("b8_floor", 3.0, 0.0, 0.0).expect("b8 floor entry");
    assert!(v > 0.0);
}
