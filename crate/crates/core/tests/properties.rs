//! Property tests for the grid, mortar, and verifier invariants.

use proptest::prelude::*;
use schwarz_mortar::legendre::{compute_s, discriminant_delta, EtaPoly};
use schwarz_mortar::mesh2d::InterfaceId;
use schwarz_mortar::mortar::{build_projection, merge_breakpoints, InterfaceGrid, MortarSpace};
use schwarz_mortar::study::{preset, StudyConfig};

fn arb_grid(max_interior: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.02f64..0.98, 1..=max_interior).prop_map(|mut interior| {
        interior.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut pts = vec![0.0];
        for v in interior {
            if v - pts.last().unwrap() > 1e-3 {
                pts.push(v);
            }
        }
        pts.push(1.0);
        if pts.len() < 3 {
            vec![0.0, 0.5, 1.0]
        } else {
            pts
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merged_grids_contain_both_inputs(a in arb_grid(10), b in arb_grid(10)) {
        let m = merge_breakpoints(&a, &b).unwrap();
        // strictly increasing
        for w in m.windows(2) {
            prop_assert!(w[1] > w[0]);
        }
        // every input breakpoint is represented within the collapse tolerance
        for v in a.iter().chain(b.iter()) {
            prop_assert!(m.iter().any(|x| (x - v).abs() <= 1e-12));
        }
        // segment count bound
        prop_assert!(m.len() <= a.len() + b.len());
    }

    #[test]
    fn mortar_partition_of_unity(pts in arb_grid(10), s in 0.0f64..1.0) {
        let grid = InterfaceGrid::new(InterfaceId(0), 0, pts).unwrap();
        let mortar = MortarSpace::new(grid).unwrap();
        let ones = vec![1.0; mortar.dim()];
        prop_assert!((mortar.eval(&ones, s) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn projection_is_a_contraction(src in arb_grid(8), tgt in arb_grid(8),
                                   vals in prop::collection::vec(-1.0f64..1.0, 12)) {
        let source = InterfaceGrid::new(InterfaceId(0), 0, src).unwrap();
        let target = MortarSpace::new(InterfaceGrid::new(InterfaceId(0), 1, tgt).unwrap()).unwrap();
        let v: Vec<f64> = (0..source.points().len())
            .map(|i| vals[i % vals.len()])
            .collect();
        let op = build_projection(&source, &target).unwrap();
        let pi = target.to_nodal(&op.apply(&v));
        let n_src = schwarz_mortar::mortar::l2_norm_sq(source.points(), &v);
        let n_pi = schwarz_mortar::mortar::l2_norm_sq(target.grid().points(), &pi);
        prop_assert!(n_pi <= n_src + 1e-12);
    }

    #[test]
    fn delta_and_maximizer_scale(coeffs in prop::collection::vec(-2.0f64..2.0, 2..=13),
                                 t in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0]) {
        let eta = EtaPoly::new(coeffs.clone()).unwrap();
        let scaled = EtaPoly::new(coeffs.iter().map(|c| c * t).collect()).unwrap();
        let d0 = discriminant_delta(&eta);
        let d1 = discriminant_delta(&scaled);
        prop_assert!((d1 - t * t * d0).abs() <= 1e-9 * d0.abs().max(1.0));
        let s0 = compute_s(&eta);
        let s1 = compute_s(&scaled);
        for (a, b) in s0.coeffs.iter().zip(&s1.coeffs) {
            prop_assert!((t * a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn config_round_trips_with_tweaks(tol_exp in -12i32..-4, max_iter in 1usize..5000,
                                      refinements in 0usize..5, base in 0usize..4) {
        let names = ["two", "four", "conforming", "single"];
        let mut cfg = preset(names[base]).unwrap();
        cfg.tol = 10f64.powi(tol_exp);
        cfg.max_iter = max_iter;
        cfg.refinements = refinements;
        let text = cfg.serialize();
        let parsed = StudyConfig::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.serialize(), text);
    }
}
