//! Worked instances with hand-checkable answers.

use std::sync::Arc;

use coarse_op::approx::{
    approximant_end, approximant_mid, block_cutdown, defect_certificate_end, halo_estimate_check, roe_curve, CurveMethod,
    RoeLadder,
};
use coarse_op::linalg::{dense_spectral_norm, SparseMatrix};
use coarse_op::locality::{inverse_experiment, property_a_report, sparsify, SparsifyStrategy};
use coarse_op::lp_op::{commut_bound_band, commut_search, commutator, eps_propagation, ql_profile, EpsMode};
use coarse_op::pou::{
    color_family, disjoint_cover, dual_family, grid_block_cover, grid_folner_pou, pou_from_cover, variation, Cover,
    DualFamily, LocalFunction, PartitionOfUnity,
};
use coarse_op::{Exponent, LpOperator, MetricSpace, ScalarFunction, SpaceSpec, Subset, C64};

fn space(spec: SpaceSpec) -> Arc<MetricSpace> {
    Arc::new(MetricSpace::build(&spec).unwrap())
}

fn path(n: usize) -> Arc<MetricSpace> {
    space(SpaceSpec::Path { n })
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn single_entry(s: &Arc<MetricSpace>, p: Exponent, x: usize, y: usize, v: f64) -> LpOperator {
    LpOperator::from_blocks(s.clone(), p, 1, [(x, y, vec![c(v)])]).unwrap()
}

/// `S e_y = e_{y+1}` on a path.
fn shift(s: &Arc<MetricSpace>, p: Exponent) -> LpOperator {
    LpOperator::from_blocks(s.clone(), p, 1, (0..s.len() - 1).map(|y| (y + 1, y, vec![c(1.0)]))).unwrap()
}

#[test]
fn metric_basics() {
    assert_eq!(path(4).dist(0, 3), 3.0);
    let g = space(SpaceSpec::Grid { dim: 2, side: 3 });
    assert_eq!(g.len(), 9);
    assert_eq!(g.geometry_profile(&[1.0]), vec![5]);
    assert!(MetricSpace::build(&SpaceSpec::Explicit { matrix: vec![vec![0.0, 1.0], vec![2.0, 0.0]] }).is_err());
    assert_eq!(path(5).ball(2, 1.0), Subset::new(vec![1, 2, 3]));
    let g5 = space(SpaceSpec::Grid { dim: 2, side: 5 });
    assert_eq!(g5.ball(12, 2.0).len(), 13);
    let p10 = path(10);
    assert_eq!(p10.set_distance(&Subset::new(vec![0, 1]), &Subset::new(vec![4, 9])).unwrap(), 3.0);
    assert_eq!(p10.greedy_net(2.0), Subset::new(vec![0, 3, 6, 9]));
    assert_eq!(p10.greedy_net(0.5).len(), 10);
    assert_eq!(space(SpaceSpec::Grid { dim: 1, side: 100 }).geometry_profile(&[2.0]), vec![5]);
}

#[test]
fn random_geometric_profile_matches_brute_force() {
    let s = space(SpaceSpec::RandomGeometric { n: 60, radius: 0.3, dim: 2, seed: 5 });
    for r in [1.0, 2.0, 3.0] {
        let brute = (0..s.len()).map(|x| (0..s.len()).filter(|&y| s.dist(x, y) <= r).count()).max().unwrap();
        assert_eq!(s.geometry_profile(&[r]), vec![brute]);
    }
}

#[test]
fn operator_examples() {
    let s = path(4);
    let b = single_entry(&s, Exponent::TWO, 0, 3, 0.5);
    let v: Vec<C64> = (0..4).map(|i| c(i as f64 + 1.0)).collect();
    assert_eq!(b.apply(&v).unwrap(), vec![c(2.0), c(0.0), c(0.0), c(0.0)]);
    assert_eq!(b.propagation(), 3.0);
    let e = eps_propagation(&b, 2.0, EpsMode::ExactSmall, 1e-12).unwrap();
    assert!((e.upper - 0.5).abs() < 1e-12 && (e.lower - 0.5).abs() < 1e-12);

    let b01 = single_entry(&s, Exponent::TWO, 0, 1, 2.0);
    let c12 = single_entry(&s, Exponent::TWO, 1, 2, 3.0);
    let prod = b01.compose(&c12).unwrap();
    assert_eq!(prod.block_support(), vec![(0, 2)]);

    let m = LpOperator::multiplication(s.clone(), Exponent::ONE, 1, &[1.0, -2.0, 3.0, 0.5]).unwrap();
    assert_eq!(m.propagation(), 0.0);
    let id = LpOperator::identity(s.clone(), Exponent::INFINITY, 2);
    let est = id.opnorm(1e-12);
    assert_eq!((est.lower, est.upper), (1.0, 1.0));
}

#[test]
fn two_by_two_norms() {
    let s = path(2);
    let a = |p| LpOperator::from_blocks(s.clone(), p, 1, [(0, 0, vec![c(1.0)]), (0, 1, vec![c(1.0)]), (1, 1, vec![c(1.0)])]).unwrap();
    let one = a(Exponent::ONE).opnorm(1e-12);
    assert_eq!((one.lower, one.upper), (2.0, 2.0));
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let two = a(Exponent::TWO).opnorm(1e-12);
    assert!(two.lower <= golden + 1e-12 && golden <= two.upper + 1e-12 && two.gap() < 1e-10);

    // Grid search over the unit ℓ³ sphere of ℝ² at angular resolution 10⁻³.
    let three = a(Exponent::new(3.0).unwrap()).opnorm(1e-12);
    let mut best = 0.0f64;
    let steps = (std::f64::consts::PI / 1e-3) as usize;
    for i in 0..steps {
        let t = i as f64 * 1e-3;
        let (x, y) = (t.cos(), t.sin());
        let norm = (x.abs().powi(3) + y.abs().powi(3)).cbrt();
        let (u, w) = (x + y, y);
        best = best.max((u.abs().powi(3) + w.abs().powi(3)).cbrt() / norm);
    }
    assert!(three.lower <= best + 1e-6, "{} vs {best}", three.lower);
    assert!(best <= three.upper + 1e-12);
}

#[test]
fn truncation_defect_is_non_increasing() {
    let s = path(40);
    let a = shift(&s, Exponent::TWO).add(&shift(&s, Exponent::TWO).adjoint_pattern(), c(0.5), c(0.5)).unwrap();
    let b = LpOperator::neumann_quasilocal(&a, 0.4, 1e-12).unwrap();
    let d: Vec<f64> = [1.0, 3.0, 6.0].iter().map(|&r| b.off_band(r).opnorm(1e-11).upper).collect();
    assert!(d[0] >= d[1] && d[1] >= d[2]);
    assert_eq!(b.band_truncate(b.propagation()).matrix(), b.matrix());
}

trait AdjointPattern {
    fn adjoint_pattern(&self) -> LpOperator;
}

impl AdjointPattern for LpOperator {
    /// The transpose, valid here because the entries are real.
    fn adjoint_pattern(&self) -> LpOperator {
        LpOperator::new(self.space().clone(), self.p(), self.k(), self.matrix().adjoint()).unwrap()
    }
}

#[test]
fn neumann_shift_profile_is_geometric() {
    let s = path(50);
    for p in [Exponent::ONE, Exponent::INFINITY] {
        let a = shift(&s, p);
        let b = LpOperator::neumann_quasilocal(&a, 0.3, 1e-14).unwrap();
        let radii: Vec<f64> = (0..15).map(f64::from).collect();
        let prof = ql_profile(&b, &radii, EpsMode::Bounds, 1e-12).unwrap();
        for e in &prof.entries {
            assert!(e.upper <= 0.3f64.powf(e.radius) / 0.7 * (1.0 + 1e-9), "R = {}: {}", e.radius, e.upper);
        }
        let id = LpOperator::identity(s.clone(), p, 1);
        let residual = id.add(&a, c(1.0), c(-0.3)).unwrap().compose(&b).unwrap().sub(&id).unwrap().opnorm(1e-12).upper;
        assert!(residual <= 1e-14 * 1.3 + 1e-15);
    }
}

#[test]
fn commutator_examples() {
    let s = path(4);
    let b = single_entry(&s, Exponent::TWO, 0, 3, -0.7);
    let f = ScalarFunction::new((0..4).map(|x| (x as f64 / 3.0).min(1.0)).collect());
    let comm = commutator(&b, &f);
    assert!((comm.matrix().get(0, 3).norm() - 0.7).abs() < 1e-15);
    assert!(commutator(&b, &ScalarFunction::constant(4, 2.0)).is_zero());

    let p100 = path(100);
    let tri = LpOperator::from_blocks(
        p100.clone(),
        Exponent::TWO,
        1,
        (0..100usize).flat_map(|x| [x.wrapping_sub(1), x, x + 1].into_iter().filter(|&y| y < 100).map(move |y| (x, y, vec![c(1.0)]))),
    )
    .unwrap();
    let bound = commut_bound_band(&tri, 0.01);
    assert!(bound.upper.unwrap() <= 0.03 + 1e-15);
    let found = commut_search(&tri, 0.01, 40, 7);
    assert!(found.lower <= bound.upper.unwrap() + 1e-12);

    let far = single_entry(&path(12), Exponent::TWO, 2, 10, 1.0);
    let found = commut_search(&far, 0.1, 20, 1);
    assert!(found.lower >= 0.8 - 1e-12);
}

#[test]
fn partition_examples() {
    let s = path(10);
    let cover = disjoint_cover(&s, 2.0);
    let cells: Vec<Vec<usize>> = cover.sets().iter().map(|c| c.points().to_vec()).collect();
    assert_eq!(cells, vec![vec![0, 1], vec![2, 3, 4], vec![5, 6, 7], vec![8, 9]]);
    assert_eq!(disjoint_cover(&s, 100.0).len(), 1);

    let ind = pou_from_cover(&s, &cover, Exponent::ONE, 1.0).unwrap();
    assert_eq!(variation(&s, &ind, 0.0), 0.0);
    assert_eq!(variation(&s, &ind, 1.0), 2.0);

    let g = space(SpaceSpec::Grid { dim: 1, side: 100 });
    let folner = grid_folner_pou(&g, 10, Exponent::ONE).unwrap();
    let bulk = coarse_op::pou::grid_bulk_mask(&g, 10).unwrap();
    let (v_bulk, _) = coarse_op::pou::variation_split(&g, &folner, 1.0, &bulk);
    assert!((v_bulk - 0.2).abs() < 1e-12);
    assert_eq!(variation(&g, &grid_folner_pou(&g, 100, Exponent::TWO).unwrap(), 3.0), 0.0);

    let intervals: Vec<Subset> = [0usize, 2, 4, 6].iter().map(|&a| Subset::new((a..=a + 3).collect())).collect();
    assert_eq!(color_family(&intervals).colors, 2);
    assert_eq!(color_family(cover.sets()).colors, 1);

    let overlap = Cover::new(&path(3), vec![Subset::new(vec![0, 1]), Subset::new(vec![1, 2])]).unwrap();
    let two = pou_from_cover(&path(3), &overlap, Exponent::TWO, 1.0).unwrap();
    let by = two.by_point();
    assert!(by[1].iter().all(|&(_, v)| (v - 0.5f64.sqrt()).abs() < 1e-15));

    let dual = dual_family(&s, &ind, 0.5).unwrap();
    dual.verify(&s, &ind).unwrap();
    assert_eq!(dual.functions[0].value(0), 1.0);
    assert_eq!(dual.functions[0].value(3), 0.0);
}

#[test]
fn approximant_examples() {
    let s = path(30);
    let b = LpOperator::random_band(s.clone(), Exponent::INFINITY, 1, 2.0, 1.0, 1.0, 3).unwrap();

    // ψ_i ≡ 1 on the 2-neighbourhood of supp φ_i swallows a band of radius 2.
    let pou = pou_from_cover(&s, &grid_block_cover(&s, 6).unwrap(), Exponent::INFINITY, 1.0).unwrap();
    let functions = pou
        .functions()
        .iter()
        .map(|f| {
            let halo = s.neighborhood(&f.support_set(), 2.0);
            LocalFunction::from_entries(halo.iter().map(|x| (x, 1.0)))
        })
        .collect();
    let swallow = DualFamily { functions, lipschitz: 0.5, halo: 2.0 };
    // Only the defect vanishes; [ψ_i, b] still couples the halo's outer layer.
    let cert = defect_certificate_end(&b, &pou, &swallow).unwrap();
    assert_eq!(cert.defect, 0.0);
    assert!(cert.bound > 0.0);

    let zero = LpOperator::zero(s.clone(), Exponent::INFINITY, 1);
    let dual = dual_family(&s, &pou, 0.2).unwrap();
    let cert = defect_certificate_end(&zero, &pou, &dual).unwrap();
    assert_eq!((cert.defect, cert.bound), (0.0, 0.0));
    assert!(approximant_end(&zero, &pou, &dual).unwrap().is_zero());

    // Indicator partitions make the interior approximant a block cutdown.
    let p = Exponent::new(1.5).unwrap();
    let bp = b.with_exponent(p);
    let ind = pou_from_cover(&s, &grid_block_cover(&s, 7).unwrap(), p, 1.0).unwrap();
    let mid = approximant_mid(&bp, &ind).unwrap();
    let family: Vec<ScalarFunction> = ind.functions().iter().map(|f| ScalarFunction::new(f.dense(30))).collect();
    let cut = block_cutdown(&bp, &family).unwrap();
    assert_eq!(mid.matrix(), cut.matrix());
    let one = PartitionOfUnity::new(&s, p, vec![LocalFunction::from_entries((0..30).map(|x| (x, 1.0)))]).unwrap();
    assert_eq!(approximant_mid(&bp, &one).unwrap().matrix(), bp.matrix());
}

#[test]
fn mid_approximant_on_grid_contracts() {
    let g = space(SpaceSpec::Grid { dim: 2, side: 40 });
    let b = LpOperator::random_band(g.clone(), Exponent::TWO, 1, 1.0, 1.0, 1.0, 17).unwrap();
    let pou = grid_folner_pou(&g, 10, Exponent::TWO).unwrap();
    let approx = approximant_mid(&b, &pou).unwrap();
    assert!(approx.opnorm(1e-10).upper <= b.opnorm(1e-10).upper + 1e-8);
}

#[test]
fn halo_examples() {
    let s = path(200);
    let b = LpOperator::random_band(s.clone(), Exponent::TWO, 1, 2.0, 1.0, 1.0, 4).unwrap();
    let l = 0.05;
    let blocks = [Subset::new((10..40).collect()), Subset::new((100..140).collect())];
    let family: Vec<ScalarFunction> = blocks.iter().map(|a| ScalarFunction::tent(&s, a, 1.0).clone()).map(|f| {
        ScalarFunction::new(f.values().iter().map(|&v| if v >= 1.0 { 1.0 } else { 0.0 }).collect())
    }).collect();
    let check = halo_estimate_check(&b, &family, l).unwrap();
    let dec = coarse_op::approx::band_decompose(&b);
    let brute = dec.len() as f64 * b.max_block_norm() * l * b.propagation();
    assert!(check.lhs_upper <= brute + 1e-12);

    let single = halo_estimate_check(&b, &family[..1], l).unwrap();
    assert_eq!(single.lhs_upper, 0.0);
    let diag = b.band_truncate(0.0);
    assert_eq!(halo_estimate_check(&diag, &family, l).unwrap().lhs_upper, 0.0);
    let close = vec![ScalarFunction::indicator(200, &Subset::new(vec![0])), ScalarFunction::indicator(200, &Subset::new(vec![5]))];
    assert!(halo_estimate_check(&b, &close, l).is_err());
}

#[test]
fn roe_curve_examples() {
    let s = path(60);
    let a = shift(&s, Exponent::ONE);
    let b = LpOperator::neumann_quasilocal(&a, 0.5, 1e-13).unwrap();
    let eps = [0.5, 0.1, 0.01, 0.001];
    let curve = roe_curve(&b, &eps, &[CurveMethod::Truncate], &RoeLadder::default()).unwrap();
    let radii: Vec<f64> = curve.rows.iter().map(|r| r.radius.unwrap()).collect();
    assert!(radii.windows(2).all(|w| w[0] <= w[1]));
    for row in &curve.rows {
        assert!(row.defect_upper <= row.eps);
    }
}

#[test]
fn sparsification_examples() {
    let g = space(SpaceSpec::Grid { dim: 1, side: 100 });
    let res = sparsify(&g, &vec![1.0; 100], 2.0, 0.8, SparsifyStrategy::GridShift).unwrap();
    assert_eq!(res.schedule.unwrap().box_side, 8);
    assert!(res.fraction >= 0.8);
    let g2 = space(SpaceSpec::Grid { dim: 2, side: 60 });
    let w: Vec<f64> = (0..3600).map(|x| ((x * 7919) % 13) as f64).collect();
    let res = sparsify(&g2, &w, 3.0, 0.5, SparsifyStrategy::GridShift).unwrap();
    assert_eq!(res.schedule.unwrap().box_side, 8);
    assert!(res.success && res.fraction >= 0.5);
    assert!(sparsify(&g2, &w, 0.5, 0.5, SparsifyStrategy::GridShift).is_err());
}

#[test]
fn inverse_of_shift_stays_under_envelope() {
    let s = path(80);
    let a = shift(&s, Exponent::ONE);
    let radii: Vec<f64> = (1..=10).map(f64::from).collect();
    let rep = inverse_experiment(&a, 0.3, &radii, &[0.1, 0.01], 1e-12).unwrap();
    assert!(rep.residual <= 1e-10 && rep.within_envelope && rep.defect_dominates);
    let rate = rep.decay_rate.unwrap();
    assert!((rate - 0.3).abs() < 1e-6, "{rate}");
}

#[test]
fn property_a_sweeps() {
    let g = space(SpaceSpec::Grid { dim: 1, side: 200 });
    let rows = property_a_report(g, Exponent::TWO, &[1.0, 2.0], &[4.0, 16.0, 64.0], 3).unwrap();
    for r in [1.0, 2.0] {
        let v: Vec<f64> = rows.iter().filter(|x| x.quantity == "variation" && x.r == r).map(|x| x.value).collect();
        assert!(v.windows(2).all(|w| w[1] <= w[0]), "{v:?}");
    }
    let t = space(SpaceSpec::Tree { branching: 2, depth: 7 });
    assert!(!property_a_report(t, Exponent::new(1.5).unwrap(), &[1.0], &[2.0], 0).unwrap().is_empty());
}

#[test]
fn dense_helpers_agree() {
    let s = path(6);
    let b = LpOperator::random_band(s, Exponent::TWO, 1, 5.0, 1.0, 1.0, 2).unwrap();
    let est = b.opnorm(1e-12);
    let exact = dense_spectral_norm(b.matrix());
    assert!(est.lower <= exact + 1e-12 && exact <= est.upper + 1e-12);
    let dense = SparseMatrix::from_dense(&b.to_dense());
    assert_eq!(&dense, b.matrix());
}
