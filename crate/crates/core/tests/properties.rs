use std::sync::Arc;

use coarse_op::approx::{approximant_mid, band_decompose, block_cutdown, defect_certificate_end, indicator_family};
use coarse_op::locality::{sparsify, SparsifyStrategy};
use coarse_op::lp_op::{commut_bound_band, commutator, eps_propagation, EpsMode};
use coarse_op::pou::{dual_family, grid_block_cover, grid_folner_pou, pou_from_cover, disjoint_cover};
use coarse_op::{Exponent, LpOperator, MetricSpace, ScalarFunction, SpaceSpec, Subset};
use proptest::prelude::*;

fn path(n: usize) -> Arc<MetricSpace> {
    Arc::new(MetricSpace::build(&SpaceSpec::Path { n }).unwrap())
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::ONE),
        Just(Exponent::TWO),
        Just(Exponent::INFINITY),
        (1.2f64..4.0).prop_map(|p| Exponent::new(p).unwrap()),
    ]
}

fn endpoint() -> impl Strategy<Value = Exponent> {
    prop_oneof![Just(Exponent::ONE), Just(Exponent::INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn band_decomposition_rebuilds_exactly(n in 2usize..40, r in 0.0f64..4.0, k in 1usize..3, density in 0.3f64..1.0, seed: u64) {
        let s = path(n);
        let b = LpOperator::random_band(s.clone(), Exponent::TWO, k, r.floor(), density, 1.0, seed).unwrap();
        let dec = band_decompose(&b);
        let back = dec.reconstruct(&b).unwrap();
        prop_assert_eq!(back.matrix(), b.matrix());
        let profile = s.geometry_profile(&[b.propagation()])[0];
        prop_assert!(dec.len() <= profile);
        for part in &dec.parts {
            prop_assert!(part.translation.displacement() <= b.propagation());
        }
    }

    #[test]
    fn norm_bounds_are_ordered_and_witnessed(n in 1usize..25, p in exponent(), seed: u64) {
        let b = LpOperator::random_band(path(n), p, 1, 2.0, 0.8, 1.0, seed).unwrap();
        let est = b.opnorm(1e-10);
        prop_assert!(est.lower <= est.upper * (1.0 + 1e-12));
        let norm_w = coarse_op::linalg::vector_norm(&est.witness, p);
        if est.lower > 0.0 {
            let bw = coarse_op::linalg::vector_norm(&b.matrix().matvec(&est.witness), p);
            prop_assert!((bw / norm_w - est.lower).abs() <= 1e-9 * est.lower.max(1.0));
        }
    }

    #[test]
    fn cutdown_norm_is_max_of_blocks(n in 4usize..30, side in 1usize..8, p in prop_oneof![Just(Exponent::ONE), Just(Exponent::TWO), Just(Exponent::INFINITY)], seed: u64) {
        let s = path(n);
        let b = LpOperator::random_band(s.clone(), p, 1, 3.0, 1.0, 1.0, seed).unwrap();
        let cover = grid_block_cover(&s, side).unwrap();
        let family: Vec<ScalarFunction> = cover.sets().iter().map(|a| ScalarFunction::indicator(n, a)).collect();
        let cut = block_cutdown(&b, &family).unwrap().opnorm(1e-10);
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for a in cover.sets() {
            let e = b.restrict(a, a).opnorm(1e-10);
            lo = lo.max(e.lower);
            hi = hi.max(e.upper);
        }
        prop_assert!(cut.lower <= hi + 2e-10 && lo <= cut.upper + 2e-10);
    }

    #[test]
    fn end_certificate_holds(n in 4usize..40, r in 1.0f64..6.0, l in 0.05f64..1.0, p in endpoint(), seed: u64) {
        let s = path(n);
        let b = LpOperator::random_band(s.clone(), p, 1, 2.0, 1.0, 1.0, seed).unwrap();
        let pou = pou_from_cover(&s, &disjoint_cover(&s, r), p, 1.0).unwrap();
        let dual = dual_family(&s, &pou, l).unwrap();
        let cert = defect_certificate_end(&b, &pou, &dual).unwrap();
        prop_assert!(cert.defect <= cert.bound * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn mid_approximant_contracts(side in 3usize..9, boxes in 1usize..5, p in (1.2f64..4.0), seed: u64) {
        let s = Arc::new(MetricSpace::build(&SpaceSpec::Grid { dim: 2, side }).unwrap());
        let p = Exponent::new(p).unwrap();
        let b = LpOperator::random_band(s.clone(), p, 1, 1.0, 1.0, 1.0, seed).unwrap();
        let pou = grid_folner_pou(&s, boxes, p).unwrap();
        let approx = approximant_mid(&b, &pou).unwrap();
        let tol = 1e-9;
        prop_assert!(approx.opnorm(tol).lower <= b.opnorm(tol).upper * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn commutators_respect_band_certificate(n in 3usize..30, l in 0.05f64..1.0, centre in 0usize..30, p in exponent(), seed: u64) {
        let s = path(n);
        let b = LpOperator::random_band(s.clone(), p, 1, 2.0, 1.0, 1.0, seed).unwrap();
        let f = ScalarFunction::tent(&s, &Subset::singleton(centre % n), l);
        let lhs = commutator(&b, &f).opnorm(1e-10).lower;
        let rhs = commut_bound_band(&b, l).upper.unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn propagation_bounds_bracket_exact(n in 2usize..9, radius in 0.0f64..4.0, p in exponent(), seed: u64) {
        let b = LpOperator::random_band(path(n), p, 1, 3.0, 0.9, 1.0, seed).unwrap();
        let exact = eps_propagation(&b, radius, EpsMode::ExactSmall, 1e-11).unwrap();
        let bounds = eps_propagation(&b, radius, EpsMode::Bounds, 1e-11).unwrap();
        prop_assert!(bounds.lower <= exact.upper + 1e-8);
        prop_assert!(exact.lower <= bounds.upper + 1e-8);
    }

    #[test]
    fn folner_partitions_sum_to_one(dim in 1usize..3, side in 2usize..12, boxes in 1usize..14, p in exponent()) {
        let s = MetricSpace::build(&SpaceSpec::Grid { dim, side }).unwrap();
        let pou = grid_folner_pou(&s, boxes, p).unwrap();
        prop_assert!(pou.max_sum_deviation() <= 1e-10);
        let fam = indicator_family(s.len(), pou.functions());
        prop_assert_eq!(fam.len(), pou.len());
    }

    #[test]
    fn grid_shift_meets_averaging_bound(dim in 1usize..3, side in 4usize..25, m in 1.0f64..4.0, c in 0.3f64..0.95, weights in proptest::collection::vec(0.0f64..5.0, 625)) {
        let s = MetricSpace::build(&SpaceSpec::Grid { dim, side }).unwrap();
        let w = &weights[..s.len()];
        let res = sparsify(&s, w, m, c, SparsifyStrategy::GridShift).unwrap();
        let schedule = res.schedule.unwrap();
        prop_assert!(res.fraction >= schedule.guaranteed_fraction - 1e-12);
        prop_assert!(res.achieved_diameter <= res.diameter_bound);
        if res.components.len() > 1 {
            prop_assert!(res.achieved_separation > m);
        }
    }
}
