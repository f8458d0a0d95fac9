mod common;

use common::*;
use mgrefactor::autotune::{model_time, rank_configs, DeviceModel, Kernel};
use mgrefactor::grid::{reorder, Direction, GridHierarchy};
use mgrefactor::parallel::{cooperative_decompose, Scheme};
use mgrefactor::pipeline::{dequantize, get_varint, put_varint, quantize};
use mgrefactor::refactor::recompose_values;
use mgrefactor::{decompose, recompose, TensorGrid, TileConfig};
use proptest::prelude::*;
use rand::Rng;

fn shape_strategy(max_dims: usize, max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(3..=max_n, 1..=max_dims)
}

fn grid_for(shape: &[usize], seed: u64, nonuniform: bool) -> TensorGrid<f64> {
    let mut r = rng(seed);
    let coords = shape
        .iter()
        .map(|&n| if nonuniform { random_coords(n, &mut r) } else { uniform(n) })
        .collect();
    let n = shape.iter().product();
    TensorGrid::new(shape.to_vec(), coords, (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn levels_are_nested_with_endpoints(shape in shape_strategy(3, 40)) {
        let coords: Vec<_> = shape.iter().map(|&n| uniform(n)).collect();
        let h = GridHierarchy::new(&shape, &coords, None).unwrap();
        for d in 0..shape.len() {
            for l in 0..=h.levels() {
                let idx = h.indices(d, l);
                prop_assert_eq!(idx[0], 0);
                prop_assert_eq!(*idx.last().unwrap(), shape[d] - 1);
                if l > 0 {
                    let fine = h.indices(d, l);
                    prop_assert!(h.indices(d, l - 1).iter().all(|i| fine.contains(i)));
                }
            }
            let oracle = level_indices(shape[d], h.levels());
            for (l, expected) in oracle.iter().enumerate() {
                prop_assert_eq!(h.indices(d, l), expected.as_slice());
            }
        }
    }

    #[test]
    fn reorder_round_trip(shape in shape_strategy(3, 33), seed in any::<u64>()) {
        let g = grid_for(&shape, seed, false);
        let h = GridHierarchy::build(&g, None).unwrap();
        for l in 1..=h.levels() {
            let v: Vec<f64> = (0..h.level_len(l)).map(|i| i as f64 * 0.5 + seed as f64).collect();
            let there = reorder(&v, &h, l, Direction::ToHierarchical).unwrap();
            let back = reorder(&there, &h, l, Direction::ToNatural).unwrap();
            prop_assert_eq!(back, v);
        }
    }

    #[test]
    fn partition_is_disjoint_cover(shape in shape_strategy(3, 9)) {
        let coords: Vec<_> = shape.iter().map(|&n| uniform(n)).collect();
        let h = GridHierarchy::new(&shape, &coords, None).unwrap();
        for l in 1..=h.levels() {
            let p = h.node_partition(l).unwrap();
            let mut all: Vec<usize> = p.coarse_nodes.iter().chain(&p.coefficient_nodes).copied().collect();
            let n = all.len();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), n);
            prop_assert_eq!(n, h.level_len(l));
        }
    }

    #[test]
    fn multilinear_fields_have_no_coefficients(
        shape in shape_strategy(3, 17),
        seed in any::<u64>(),
        nonuniform in any::<bool>(),
    ) {
        let mut r = rng(seed);
        let coords: Vec<Vec<f64>> = shape
            .iter()
            .map(|&n| if nonuniform { random_coords(n, &mut r) } else { uniform(n) })
            .collect();
        let a: Vec<(f64, f64)> = shape.iter().map(|_| (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
        let g = TensorGrid::from_fn(shape.clone(), coords, |x| {
            x.iter().zip(&a).map(|(&xi, &(c0, c1))| c0 + c1 * xi).product()
        }).unwrap();
        let scale = g.values().iter().fold(1.0f64, |m, v: &f64| m.max(v.abs()));
        let d = decompose(&g, None).unwrap();
        for k in 1..=d.levels() {
            for &c in d.class(k).unwrap() {
                prop_assert!(c.abs() <= 1e-13 * scale, "class {} holds {:e}", k, c);
            }
        }
    }

    #[test]
    fn round_trip_and_truncation(shape in shape_strategy(3, 20), seed in any::<u64>(), nonuniform in any::<bool>()) {
        let g = grid_for(&shape, seed, nonuniform);
        let d = decompose(&g, None).unwrap();
        let (back, _) = recompose(&d, None).unwrap();
        prop_assert!(max_abs_diff(back.values(), g.values()) <= 1e-12 * range(g.values()).max(1.0));
        let k = (seed as usize) % (d.levels() + 1);
        let mut scrambled = d.clone();
        for c in k + 1..=d.levels() {
            scrambled.class_mut(c).unwrap().iter_mut().for_each(|v| *v = 1e3);
        }
        prop_assert_eq!(recompose_values(&d, Some(k)).unwrap(), recompose_values(&scrambled, Some(k)).unwrap());
    }

    #[test]
    fn model_positive_and_decreasing_in_bandwidth(
        bx in 1usize..128, by in 1usize..8, bz in 1usize..8,
        n in 17usize..600, bw in 1e9f64..1e13, factor in 1.01f64..100.0,
    ) {
        let cfg = TileConfig::new(bx, by, bz).unwrap();
        for kernel in Kernel::ALL {
            let slow = model_time(kernel, &cfg, n, &DeviceModel::new(32, bw, 4).unwrap());
            let fast = model_time(kernel, &cfg, n, &DeviceModel::new(32, bw * factor, 4).unwrap());
            prop_assert!(slow > 0.0 && fast > 0.0);
            prop_assert!(fast < slow);
        }
    }

    #[test]
    fn ranking_ignores_bandwidth_scale(n in 17usize..600, bw in 1e9f64..1e13, factor in 1e-3f64..1e3) {
        let cands = TileConfig::standard_candidates();
        for kernel in Kernel::ALL {
            let a = rank_configs(kernel, &cands, n, &DeviceModel::new(32, bw, 4).unwrap()).unwrap();
            let b = rank_configs(kernel, &cands, n, &DeviceModel::new(32, bw * factor, 4).unwrap()).unwrap();
            prop_assert_eq!(a.ranks_for(&cands), b.ranks_for(&cands));
        }
    }

    #[test]
    fn quantizer_stays_in_bound(values in prop::collection::vec(-1e3f64..1e3, 1..200), eb in 1e-3f64..10.0) {
        let w = 2.0 * eb / 3.0;
        let q = quantize(&values, w, eb).unwrap();
        let back = dequantize(&q, w);
        prop_assert!(max_abs_diff(&back, &values) <= eb);
        let mut bytes = Vec::new();
        for &v in &q {
            put_varint(&mut bytes, v);
        }
        let mut pos = 0;
        let decoded: Vec<i64> = (0..q.len()).map(|_| get_varint(&bytes, &mut pos).unwrap()).collect();
        prop_assert_eq!(decoded, q);
        prop_assert_eq!(pos, bytes.len());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cooperative_equals_serial(
        shape in prop::collection::vec(9usize..=17, 2..=3),
        workers in 1usize..=4,
        rr in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let g = grid_for(&shape, seed, true);
        let scheme = if rr { Scheme::ShiftedRoundRobin } else { Scheme::Block };
        let (coop, _) = cooperative_decompose(&g, workers, scheme).unwrap();
        prop_assert_eq!(coop, decompose(&g, None).unwrap());
    }
}
