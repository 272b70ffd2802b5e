mod common;

use common::{brute_window_sum, integers, interior, positions, uniform};
use proptest::prelude::*;
use slidecorr_core::moving_sum::{
    separable_window_sum_ordered, separable_window_sum_parallel, window_sum_via_cumsum_parallel,
};
use slidecorr_core::{separable_window_sum, window_sum_via_cumsum, Grid, WindowSpec};

fn assert_interior_exact(g: &Grid<f64>, sums: &Grid<f64>, lengths: &[usize]) {
    for idx in positions(g.shape()) {
        if interior(&idx, g.shape(), lengths) {
            let expected = brute_window_sum(g, &idx, lengths);
            assert_eq!(sums[&idx[..]].to_bits(), expected.to_bits(), "at {idx:?}");
        }
    }
}

#[test]
fn separable_matches_brute_force_2d() {
    let g = integers(&[7, 7], 11);
    let w = WindowSpec::new([3, 3]).unwrap();
    assert_interior_exact(&g, &separable_window_sum(&g, &w).unwrap(), w.lengths());
}

#[test]
fn separable_matches_brute_force_3d() {
    let g = integers(&[5, 5, 5], 12);
    let w = WindowSpec::new([3, 3, 3]).unwrap();
    assert_interior_exact(&g, &separable_window_sum(&g, &w).unwrap(), w.lengths());
}

#[test]
fn cumsum_matches_brute_force() {
    let g = integers(&[16, 16], 13);
    let w = WindowSpec::new([5, 5]).unwrap();
    assert_interior_exact(&g, &window_sum_via_cumsum(&g, &w).unwrap(), w.lengths());

    let g = integers(&[6, 7, 8], 14);
    let w = WindowSpec::new([3, 5, 1]).unwrap();
    assert_interior_exact(&g, &window_sum_via_cumsum(&g, &w).unwrap(), w.lengths());
    assert_interior_exact(&g, &separable_window_sum(&g, &w).unwrap(), w.lengths());
}

#[test]
fn backends_agree_bitwise_on_integers() {
    let g = integers(&[40, 33], 15);
    let w = WindowSpec::new([7, 5]).unwrap();
    let a = separable_window_sum(&g, &w).unwrap();
    let b = window_sum_via_cumsum(&g, &w).unwrap();
    for idx in positions(g.shape()) {
        if interior(&idx, g.shape(), w.lengths()) {
            assert_eq!(a[&idx[..]].to_bits(), b[&idx[..]].to_bits());
        }
    }
}

#[test]
fn thread_count_does_not_change_sums() {
    let g: Grid<f64> = uniform(&[67, 301], 16);
    let w = WindowSpec::new([5, 9]).unwrap();
    let one = separable_window_sum_parallel(&g, &w, 1).unwrap();
    let one_c = window_sum_via_cumsum_parallel(&g, &w, 1).unwrap();
    for t in [2, 3, 7, 16] {
        assert_eq!(
            separable_window_sum_parallel(&g, &w, t).unwrap().as_slice(),
            one.as_slice()
        );
        assert_eq!(
            window_sum_via_cumsum_parallel(&g, &w, t)
                .unwrap()
                .as_slice(),
            one_c.as_slice()
        );
    }
}

fn grid_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<usize>, u64)> {
    (1usize..=3)
        .prop_flat_map(|ndim| {
            prop::collection::vec((1usize..=9, 0usize..=3), ndim).prop_map(|axes| {
                let shape: Vec<usize> = axes.iter().map(|&(e, _)| e).collect();
                let lengths = axes
                    .iter()
                    .map(|&(e, h)| {
                        let k = 2 * h + 1;
                        if k <= e {
                            k
                        } else if e % 2 == 1 {
                            e
                        } else {
                            e - 1
                        }
                    })
                    .collect();
                (shape, lengths)
            })
        })
        .prop_flat_map(|(s, l)| (Just(s), Just(l), any::<u64>()))
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_backends_agree((shape, lengths, seed) in grid_strategy()) {
        let g: Grid<f64> = uniform(&shape, seed).map(|v| v * 200.0 - 100.0);
        let w = WindowSpec::new(lengths.clone()).unwrap();
        let a = separable_window_sum(&g, &w).unwrap();
        let b = window_sum_via_cumsum(&g, &w).unwrap();
        for idx in positions(&shape) {
            if interior(&idx, &shape, &lengths) {
                prop_assert!(close(a[&idx[..]], b[&idx[..]], 1e-6));
            }
        }
    }

    #[test]
    fn sums_are_linear((shape, lengths, seed) in grid_strategy(), scale in -5.0f64..5.0) {
        let g1: Grid<f64> = uniform(&shape, seed);
        let g2: Grid<f64> = uniform(&shape, seed ^ 0xabcdef);
        let combo = Grid::new(shape.clone(), g1.as_slice().iter().zip(g2.as_slice()).map(|(a, b)| scale * a + b).collect()).unwrap();
        let w = WindowSpec::new(lengths.clone()).unwrap();
        let s1 = separable_window_sum(&g1, &w).unwrap();
        let s2 = separable_window_sum(&g2, &w).unwrap();
        let sc = separable_window_sum(&combo, &w).unwrap();
        for idx in positions(&shape) {
            if interior(&idx, &shape, &lengths) {
                let expected = scale * s1[&idx[..]] + s2[&idx[..]];
                prop_assert!(close(sc[&idx[..]], expected, 1e-9));
            }
        }
    }

    #[test]
    fn axis_order_is_irrelevant((shape, lengths, seed) in grid_strategy()) {
        let g: Grid<f64> = uniform(&shape, seed);
        let w = WindowSpec::new(lengths.clone()).unwrap();
        let forward: Vec<usize> = (0..shape.len()).collect();
        let backward: Vec<usize> = forward.iter().rev().copied().collect();
        let a = separable_window_sum_ordered(&g, &w, &forward, 1).unwrap();
        let b = separable_window_sum_ordered(&g, &w, &backward, 2).unwrap();
        for idx in positions(&shape) {
            if interior(&idx, &shape, &lengths) {
                prop_assert!(close(a[&idx[..]], b[&idx[..]], 1e-9));
                prop_assert!(close(a[&idx[..]], brute_window_sum(&g, &idx, &lengths), 1e-9));
            }
        }
    }
}
