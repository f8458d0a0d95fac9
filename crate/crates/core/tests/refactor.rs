mod common;

use common::*;
use mgrefactor::grid::{GridHierarchy, TensorGrid};
use mgrefactor::refactor::{
    decompose_spatiotemporal, decompose_with, recompose_spatiotemporal, recompose_values,
    recompose_with_report, select_tiling, DecomposeOptions, PassCounters,
};
use mgrefactor::{decompose, recompose, Error, RefactoredData};
use rand::Rng;

fn random_grid(shape: &[usize], nonuniform: bool, seed: u64) -> TensorGrid<f64> {
    let mut r = rng(seed);
    let coords: Vec<Vec<f64>> = shape
        .iter()
        .map(|&n| if nonuniform { random_coords(n, &mut r) } else { uniform(n) })
        .collect();
    let n: usize = shape.iter().product();
    let values = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    TensorGrid::new(shape.to_vec(), coords, values).unwrap()
}

fn assert_matches_reference(g: &TensorGrid<f64>) {
    let r = decompose(g, None).unwrap();
    let reference = reference_decomposition(g.shape(), g.coords(), g.values());
    assert_eq!(r.levels(), reference.levels);
    let tol = 1e-11 * range(g.values());
    for (k, expected) in reference.classes.iter().enumerate() {
        let got = r.class(k).unwrap();
        let err = max_abs_diff(got, expected);
        assert!(err <= tol, "{:?} class {k}: error {err:e}", g.shape());
    }
}

#[test]
fn classes_equal_dense_projections() {
    for (i, shape) in [vec![5], vec![9], vec![17], vec![6], vec![5, 5], vec![9, 5], vec![7, 10], vec![5, 5, 5], vec![9, 6, 5]]
        .iter()
        .enumerate()
    {
        for nonuniform in [false, true] {
            assert_matches_reference(&random_grid(shape, nonuniform, i as u64));
        }
    }
}

#[test]
fn quadratic_example() {
    let g = TensorGrid::new(vec![5], vec![vec![0.0, 1.0, 2.0, 3.0, 4.0]], vec![6.0, 2.0, 0.0, 0.0, 2.0]).unwrap();
    let r = decompose(&g, None).unwrap();
    assert_eq!(r.levels(), 2);
    assert_eq!(r.class(2).unwrap(), &[-1.0, -1.0]);
    assert_eq!(r.class(0).unwrap().len(), 2);
    let (back, _) = recompose(&r, None).unwrap();
    assert!(max_abs_diff(back.values(), g.values()) <= 1e-13);
}

#[test]
fn quadratic_finest_coefficients() {
    for n in [5, 9, 17, 33, 65] {
        let h = 1.0 / (n - 1) as f64;
        let g = TensorGrid::from_fn(vec![n], vec![uniform(n)], |x| x[0] * x[0]).unwrap();
        let r = decompose(&g, None).unwrap();
        for &c in r.class(r.levels()).unwrap() {
            assert!((c + h * h).abs() <= 1e-12 * h * h, "n={n}: {c} vs {}", -h * h);
        }
    }
}

#[test]
fn constant_field() {
    let g = TensorGrid::uniform(vec![9, 17], vec![3.25f64; 153]).unwrap();
    let r = decompose(&g, None).unwrap();
    for k in 1..=r.levels() {
        assert!(r.class(k).unwrap().iter().all(|&c| c.abs() < 1e-14));
    }
    assert!(r.class(0).unwrap().iter().all(|&c| (c - 3.25).abs() < 1e-14));
    assert!(r.total_elements() == 153);
}

#[test]
fn input_is_not_modified() {
    let g = random_grid(&[9, 9], false, 11);
    let before = g.clone();
    let _ = decompose(&g, None).unwrap();
    assert_eq!(g, before);
}

#[test]
fn round_trip_f64_and_f32() {
    for shape in [vec![33], vec![17, 9], vec![9, 9, 9]] {
        for nonuniform in [false, true] {
            let g = random_grid(&shape, nonuniform, 5);
            let (back, rep) = recompose_with_report(&decompose(&g, None).unwrap(), None, Some(&g)).unwrap();
            let e = rep.errors.unwrap();
            assert!(e.max_abs <= 1e-12 * range(g.values()));
            assert_eq!(e.max_abs, max_abs_diff(back.values(), g.values()));

            let g32 = g.with_values(g.values().iter().map(|&v| v as f32).collect()).unwrap();
            let (back, _) = recompose(&decompose(&g32, None).unwrap(), None).unwrap();
            let err = g32.values().iter().zip(back.values()).fold(0.0f32, |m, (a, b)| m.max((a - b).abs()));
            assert!(f64::from(err) <= 1e-5 * range(g.values()));
        }
    }
}

#[test]
fn dyadic_round_trip_is_exact() {
    // values and spacings exactly representable; every operation stays exact
    let g = TensorGrid::new(vec![5], vec![vec![0.0, 1.0, 2.0, 3.0, 4.0]], vec![0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let r = decompose(&g, None).unwrap();
    assert_eq!(recompose(&r, None).unwrap().0, g);
}

#[test]
fn coarsest_only_is_multilinear_upsampling() {
    let g = random_grid(&[9, 5], true, 21);
    let r = decompose(&g, None).unwrap();
    let l = r.levels();
    let c0 = r.class(0).unwrap().to_vec();
    let (mut up, mut s) = (c0, vec![level_indices(9, l)[0].len(), level_indices(5, l)[0].len()]);
    for d in 0..2 {
        let coarse: Vec<f64> = level_indices(g.shape()[d], l)[0].iter().map(|&i| g.coords()[d][i]).collect();
        (up, s) = apply_along(&prolongation(&g.coords()[d], &coarse), &up, &s, d);
    }
    let (k0, rep) = recompose(&r, Some(0)).unwrap();
    assert_eq!(rep.classes_used, 0);
    assert!(max_abs_diff(k0.values(), &up) <= 1e-13);
}

#[test]
fn truncation_ignores_later_classes() {
    let g = random_grid(&[17, 17], false, 3);
    let r = decompose(&g, None).unwrap();
    for k in 0..r.levels() {
        let mut zeroed = r.clone();
        for c in k + 1..=r.levels() {
            zeroed.class_mut(c).unwrap().iter_mut().for_each(|v| *v = 0.0);
        }
        assert_eq!(recompose_values(&r, Some(k)).unwrap(), recompose_values(&zeroed, Some(k)).unwrap());
        assert_eq!(recompose_values(&r.truncated(k), Some(k)).unwrap(), recompose_values(&r, Some(k)).unwrap());
    }
}

#[test]
fn truncated_projection_matches_reference() {
    let g = random_grid(&[17, 9], true, 8);
    let r = decompose(&g, None).unwrap();
    let reference = reference_decomposition(g.shape(), g.coords(), g.values());
    // k classes reproduce the level-k projection prolonged to the full grid
    for k in 0..r.levels() {
        let values = recompose_values(&r, Some(k)).unwrap();
        let (mut up, mut s) = (reference.projections[k].clone(), vec![0usize; 2]);
        for d in 0..2 {
            s[d] = level_indices(g.shape()[d], r.levels())[k].len();
        }
        for d in 0..2 {
            let coarse: Vec<f64> =
                level_indices(g.shape()[d], r.levels())[k].iter().map(|&i| g.coords()[d][i]).collect();
            (up, s) = apply_along(&prolongation(&g.coords()[d], &coarse), &up, &s, d);
        }
        assert!(max_abs_diff(&values, &up) <= 1e-11, "k={k}");
    }
}

#[test]
fn error_decreases_with_classes() {
    let n = 33;
    let g = TensorGrid::from_fn(vec![n, n], vec![uniform(n), uniform(n)], |x| {
        (2.0 * std::f64::consts::PI * x[0]).sin() * (2.0 * std::f64::consts::PI * x[1]).sin()
    })
    .unwrap();
    let r = decompose(&g, None).unwrap();
    assert!(r.levels() >= 4);
    let mut prev = f64::INFINITY;
    for k in 0..=r.levels() {
        let (_, rep) = recompose_with_report(&r, Some(k), Some(&g)).unwrap();
        let e = rep.errors.unwrap().weighted_l2;
        let dense = weighted_norm_sq(g.shape(), g.coords(), &{
            let v = recompose_values(&r, Some(k)).unwrap();
            v.iter().zip(g.values()).map(|(a, b)| a - b).collect::<Vec<_>>()
        })
        .max(0.0)
        .sqrt();
        assert!((e - dense).abs() <= 1e-12 + 1e-9 * dense);
        assert!(e <= prev, "k={k}: {e} > {prev}");
        prev = e;
    }
}

#[test]
fn level_bounds() {
    let g = random_grid(&[9, 9], false, 1);
    let r = decompose(&g, None).unwrap();
    assert!(matches!(recompose(&r, Some(4)), Err(Error::InvalidLevel { .. })));
    assert!(matches!(recompose(&r.truncated(1), Some(2)), Err(Error::MissingClass { requested: 2, available: 2 })));
    assert!(matches!(decompose(&g, Some(0)), Err(Error::InvalidLevel { .. })));
    assert_eq!(decompose(&g, Some(2)).unwrap().levels(), 2);
}

#[test]
fn deterministic() {
    let g = random_grid(&[17, 9, 5], true, 2);
    let a = decompose(&g, None).unwrap();
    let b = decompose(&g, None).unwrap();
    for k in 0..=a.levels() {
        assert_eq!(a.class_bytes(k), b.class_bytes(k));
    }
}

#[test]
fn pass_counters_match_prediction() {
    for shape in [vec![65], vec![17, 33], vec![17, 17, 17], vec![9, 5, 6]] {
        let g = random_grid(&shape, false, 0);
        let (_, counters) = decompose_with(&g, &DecomposeOptions::default()).unwrap();
        let h = GridHierarchy::build(&g, None).unwrap();
        assert_eq!(counters, PassCounters::predicted(&h));
    }
}

#[test]
fn three_d_passes_per_level() {
    let g = random_grid(&[65, 65, 65], false, 0);
    let h = GridHierarchy::build(&g, None).unwrap();
    let top = &PassCounters::predicted(&h).levels[0];
    // 1 coefficient + 1 copy + correction + apply, correction tending to 5.25
    assert!((top.correction_passes() - 5.25).abs() < 0.2, "{}", top.correction_passes());
    assert!((top.passes() - 7.375).abs() < 0.25, "{}", top.passes());
}

#[test]
fn spatiotemporal_equals_stacked_grid() {
    let snaps: Vec<TensorGrid<f64>> = (0..4).map(|s| random_grid(&[9, 9], false, 40 + s)).collect();
    let times = vec![0.0, 0.5, 1.25, 2.0];
    let st = decompose_spatiotemporal(&snaps, &times, None).unwrap();
    let values: Vec<f64> = snaps.iter().flat_map(|s| s.values().to_vec()).collect();
    let stacked = TensorGrid::new(vec![9, 9, 4], vec![uniform(9), uniform(9), times.clone()], values).unwrap();
    let direct = decompose(&stacked, None).unwrap();
    assert_eq!(st, direct);
    let back = recompose_spatiotemporal(&st, None).unwrap();
    assert_eq!(back.len(), 4);
    for (a, b) in back.iter().zip(&snaps) {
        assert!(max_abs_diff(a.values(), b.values()) <= 1e-12 * 2.0);
    }
}

#[test]
fn spatiotemporal_two_snapshots() {
    let s = random_grid(&[9, 9], false, 3);
    let st = decompose_spatiotemporal(&[s.clone(), s.clone()], &[0.0, 1.0], None).unwrap();
    assert_eq!(st.shape(), &[9, 9, 2]);
    let back = recompose_spatiotemporal(&st, None).unwrap();
    assert!(max_abs_diff(back[1].values(), s.values()) <= 1e-12 * 2.0);
    // identical frames: the data is constant in time, so class 0 repeats too
    let c0 = st.class(0).unwrap();
    let half = c0.len() / 2;
    assert!(max_abs_diff(&c0[..half], &c0[half..]) <= 1e-14);
}

#[test]
fn linear_in_time_has_zero_temporal_coefficients() {
    let base = random_grid(&[9, 9], false, 9);
    let slope = random_grid(&[9, 9], false, 10);
    let times = uniform(9);
    let snaps: Vec<_> = times
        .iter()
        .map(|&t| base.with_values(base.values().iter().zip(slope.values()).map(|(b, s)| b + t * s).collect()).unwrap())
        .collect();
    let st = decompose_spatiotemporal(&snaps, &times, None).unwrap();
    let h = st.hierarchy().unwrap();
    for l in 1..=st.levels() {
        let order = mgrefactor::grid::hierarchical_order(&h, l);
        let ncoarse = h.level_len(l - 1);
        // positions in class l whose node type is "new along time only"
        let shape = h.level_shape(l);
        let cp: Vec<Vec<usize>> = (0..3).map(|d| h.coarse_positions(d, l)).collect();
        for (k, &lin) in order[ncoarse..].iter().enumerate() {
            let (i, j, t) = (lin % shape[0], (lin / shape[0]) % shape[1], lin / (shape[0] * shape[1]));
            let time_only = cp[0].contains(&i) && cp[1].contains(&j) && !cp[2].contains(&t);
            if time_only {
                assert!(st.class(l).unwrap()[k].abs() < 1e-12, "level {l}");
            }
        }
    }
}

#[test]
fn spatiotemporal_errors() {
    let a = random_grid(&[9, 9], false, 1);
    let b = random_grid(&[9, 5], false, 1);
    assert!(matches!(decompose_spatiotemporal(&[a.clone(), b], &[0.0, 1.0], None), Err(Error::Shape(_))));
    assert!(decompose_spatiotemporal(&[a.clone()], &[0.0], None).is_err());
    assert!(matches!(decompose_spatiotemporal(&[a.clone(), a], &[0.0], None), Err(Error::Shape(_))));
}

#[test]
fn tiling_phases() {
    let p = select_tiling(4, &[33, 33, 33, 8], 4096);
    assert_eq!(p.spatial.tiled_dims, vec![0, 1, 2]);
    assert_eq!(p.spatial.outer_dims, vec![3]);
    let (t, temporal) = p.temporal.as_ref().unwrap();
    assert_eq!(*t, 3);
    assert_eq!(temporal.tiled_dims, vec![0, 1, 3]);
    assert_eq!(temporal.outer_dims, vec![2]);
    let p2 = select_tiling(2, &[65, 65], 4096);
    assert_eq!(p2.spatial.tiled_dims, vec![0, 1]);
    assert!(p2.spatial.outer_dims.is_empty() && p2.temporal.is_none());
    for budget in [1, 7, 64, 100000] {
        let p = select_tiling(4, &[65, 65, 65, 65], budget);
        assert!(p.spatial.config.volume() <= budget.max(1));
        assert!(p.temporal.unwrap().1.config.volume() <= budget.max(1));
    }
    assert_eq!(select_tiling(3, &[3, 65, 65], 4096).spatial.config.bx, 3);
}

#[test]
fn from_parts_validates() {
    let coords = vec![uniform(5)];
    assert!(RefactoredData::<f64>::from_parts(vec![5], coords.clone(), 2, vec![vec![0.0; 2], vec![0.0; 1]]).is_ok());
    assert!(RefactoredData::<f64>::from_parts(vec![5], coords.clone(), 2, vec![vec![0.0; 3]]).is_err());
    assert!(RefactoredData::<f64>::from_parts(vec![5], coords, 3, vec![]).is_err());
}
