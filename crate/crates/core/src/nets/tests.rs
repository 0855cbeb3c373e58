use proptest::prelude::*;

use super::*;

fn v(xs: &[f64]) -> Vector {
    Vector::from_f64(xs)
}

fn square() -> Domain {
    Domain::unit_box(2, NormKind::Euclidean)
}

fn grid20() -> TargetSet {
    TargetSet::grid(&square(), &Real::ratio(1, 20)).unwrap()
}

#[test]
fn grid_has_interior_points_only() {
    let pts = grid20().points(&square());
    assert_eq!(pts.len(), 361);
    assert_eq!(pts[0].to_f64(), vec![0.05, 0.05]);
}

#[test]
fn restrict_follows_the_margin() {
    let one = restrict(&grid20(), &square(), 1);
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].to_f64(), vec![0.5, 0.5]);
    let two = restrict(&grid20(), &square(), 2);
    // coordinates 0.25 ..= 0.75 in steps of 0.05
    assert_eq!(two.len(), 11 * 11);
    assert!(restrict(&TargetSet::Points(vec![]), &square(), 3).is_empty());
}

#[test]
fn separation_examples() {
    let e = NormKind::Euclidean;
    assert_eq!(separation(&[v(&[0.0, 0.0]), v(&[1.0, 0.0])], e).to_f64(), 1.0);
    assert_eq!(separation(&[v(&[0.0, 0.0])], e), Real::infinity());
    assert_eq!(separation(&[v(&[0.0, 0.0]), v(&[0.3, 0.4])], e).to_f64(), 0.5);
}

#[test]
fn greedy_net_is_maximal_and_idempotent() {
    let pts: Vec<Vector> =
        (0..=10).flat_map(|i| (0..=10).map(move |j| v(&[i as f64 / 10.0, j as f64 / 10.0]))).collect();
    let delta = Real::from_f64(0.25);
    let e = NormKind::Euclidean;
    let net = greedy_net(&pts, &delta, &[], e).unwrap();
    assert!(separation(&net, e) >= delta);
    for p in &pts {
        assert!(net.iter().any(|q| distance(p, q, e) < delta), "{p:?} could be added");
    }
    assert_eq!(greedy_net(&net, &delta, &[], e).unwrap(), net);
    assert_eq!(greedy_net(&pts[..1], &delta, &[], e).unwrap(), pts[..1].to_vec());
    let bad = greedy_net(&pts, &delta, &pts[..2], e).unwrap_err();
    assert!(matches!(bad, Error::SeedNotSeparated { .. }));
}

#[test]
fn singleton_target_repeats_across_levels() {
    let g = TargetSet::Points(vec![v(&[0.5, 0.5])]);
    let fam = nested_nets(&g, &square(), 3).unwrap();
    for l in &fam.levels {
        assert_eq!(l, &vec![v(&[0.5, 0.5])]);
    }
}

#[test]
fn grid_family_satisfies_invariants() {
    let g = grid20();
    let fam = nested_nets(&g, &square(), 6).unwrap();
    fam.check(&g, &square()).unwrap();
    for k in 1..=6 {
        assert!(fam.addable(&g, &square(), k).is_empty(), "level {k} not maximal");
    }
    let sizes: Vec<usize> = fam.levels.iter().map(Vec::len).collect();
    assert_eq!(sizes[0], 1);
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    let csv = fam.to_csv();
    assert!(csv.starts_with("k,x1,x2\n1,0.5,0.5\n"), "{csv}");
    assert_eq!(csv.lines().count(), 1 + sizes.iter().sum::<usize>());
}

#[test]
fn sampled_targets_respect_the_predicate() {
    let keep: Arc<dyn Fn(&Vector) -> bool + Send + Sync> = Arc::new(|p: &Vector| p.to_f64()[0] < 0.5);
    let g = TargetSet::Sampled { count: 300, seed: 2, keep: Some(keep) };
    let fam = nested_nets(&g, &square(), 5).unwrap();
    fam.check(&g, &square()).unwrap();
    assert!(fam.levels.iter().flatten().all(|p| p.to_f64()[0] < 0.5));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_targets_give_valid_families(pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..120), kmax in 1u32..7) {
        let g = TargetSet::Points(pts.iter().map(|&(a, b)| v(&[a, b])).collect());
        let fam = nested_nets(&g, &square(), kmax).unwrap();
        prop_assert!(fam.check(&g, &square()).is_ok());
        for k in 1..=kmax as usize {
            prop_assert!(fam.addable(&g, &square(), k).is_empty());
        }
    }
}
