use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tml_core::construct::{cross_distance, glue_by_correspondence};
use tml_core::correspondence::MinimalWalker;
use tml_core::engine::{
    distance, evaluate_certificate, frechet_cost, timed_frechet_cost, time_range_bound,
};
use tml_core::*;

fn space(seed: u64, n: usize, graph: bool) -> FiniteMetricSpace {
    let model = if graph { MetricModel::Graph } else { MetricModel::Euclidean(2) };
    random_metric_space(seed, n, model)
}

fn timed(seed: u64, n: usize, graph: bool, time: u8) -> TimedMetricSpace {
    let x = space(seed, n, graph);
    let model = match time % 3 {
        0 => TimeModel::Cone,
        1 => TimeModel::SetCone(1 + (seed as usize) % n),
        _ => TimeModel::McShane(2),
    };
    random_time_function(seed ^ 0x5eed, &x, model)
}

fn covering_enumeration(rng: &mut ChaCha8Rng, n: usize) -> Enumeration {
    let mut seq: Vec<usize> = (0..n).collect();
    for _ in 0..rng.gen_range(0..2 * n) {
        seq.push(rng.gen_range(0..n));
    }
    for i in (1..seq.len()).rev() {
        seq.swap(i, rng.gen_range(0..=i));
    }
    Enumeration::new(seq)
}

/// Every relation on `n1 x n2` with full projections.
fn all_correspondences(n1: usize, n2: usize) -> Vec<Vec<(usize, usize)>> {
    let cells: Vec<(usize, usize)> = (0..n1).flat_map(|a| (0..n2).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << cells.len()) {
        let pairs: Vec<_> = (0..cells.len()).filter(|k| mask >> k & 1 == 1).map(|k| cells[k]).collect();
        let left = (0..n1).all(|a| pairs.iter().any(|p| p.0 == a));
        let right = (0..n2).all(|b| pairs.iter().any(|p| p.1 == b));
        if left && right {
            out.push(pairs);
        }
    }
    out
}

fn min_over(rs: &[Vec<(usize, usize)>], f: impl Fn(&[(usize, usize)]) -> f64) -> f64 {
    rs.iter().map(|r| f(r)).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn embeddings_are_isometric(seed: u64, n in 1usize..=6, graph: bool, time in 0u8..3) {
        let t = timed(seed, n, graph, time);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = covering_enumeration(&mut rng, n);
        let c = frechet_embed(t.base(), &e).unwrap();
        let ct = timed_frechet_embed(&t, &e).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((c.sup_dist(i, j) - t.dist(i, j)).abs() <= 1e-12);
                prop_assert!((ct.sup_dist(i, j) - t.dist(i, j)).abs() <= 1e-12);
            }
        }
        prop_assert_eq!(delete_first_coordinate(&ct).unwrap(), c);
    }

    #[test]
    fn deletion_never_increases_hausdorff(s1: u64, s2: u64, n1 in 1usize..=5, n2 in 1usize..=5, time in 0u8..3) {
        let a = timed(s1, n1, false, time);
        let b = timed(s2, n2, true, time);
        let mut rng = ChaCha8Rng::seed_from_u64(s1 ^ s2);
        let m = n1.max(n2) + rng.gen_range(0..3);
        let pad = |rng: &mut ChaCha8Rng, n: usize| {
            let mut seq: Vec<usize> = (0..n).collect();
            while seq.len() < m {
                seq.push(rng.gen_range(0..n));
            }
            Enumeration::new(seq)
        };
        let (ea, eb) = (pad(&mut rng, n1), pad(&mut rng, n2));
        let ta = timed_frechet_embed(&a, &ea).unwrap();
        let tb = timed_frechet_embed(&b, &eb).unwrap();
        let full = hausdorff_sup(&ta, &tb).unwrap();
        let cut = hausdorff_sup(&delete_first_coordinate(&ta).unwrap(), &delete_first_coordinate(&tb).unwrap()).unwrap();
        prop_assert!(cut <= full);
    }

    #[test]
    fn generators_validate(seed: u64, n in 1usize..=8, graph: bool, time in 0u8..3) {
        let t = timed(seed, n, graph, time);
        prop_assert!(FiniteMetricSpace::new(t.base().labels().to_vec(), t.base().to_matrix(), DEFAULT_TOL).is_ok());
        prop_assert!(TimedMetricSpace::new(t.base().clone(), t.times().to_vec(), DEFAULT_TOL).is_ok());
        if time % 3 == 0 {
            prop_assert_eq!(classify(&t, DEFAULT_TOL), TimeClass::BigBang);
        }
        if time % 3 == 1 {
            prop_assert!(classify(&t, DEFAULT_TOL).is_future_developed());
        }
    }

    #[test]
    fn exact_kinds_are_symmetric(s1: u64, s2: u64, n1 in 1usize..=4, n2 in 1usize..=4, time in 0u8..3) {
        let a = timed(s1, n1, false, time);
        let b = timed(s2, n2, true, time);
        for kind in [DistanceKind::Gh, DistanceKind::KappaGh, DistanceKind::TauH, DistanceKind::PtGh] {
            let ab = distance(kind, &a, &b, DEFAULT_BUDGET, DEFAULT_TOL).unwrap();
            let ba = distance(kind, &b, &a, DEFAULT_BUDGET, DEFAULT_TOL).unwrap();
            prop_assert_eq!((ab.lower, ab.upper, ab.is_exact), (ba.lower, ba.upper, ba.is_exact));
            let swapped = Certificate {
                correspondence: ab.certificate.correspondence.transpose(),
                basepoints: ab.certificate.basepoints.map(|(p, q)| (q, p)),
                zero_sets: None,
            };
            prop_assert_eq!(evaluate_certificate(kind, &swapped, &b, &a), ab.upper);
        }
    }

    #[test]
    fn structured_kinds_are_symmetric(s1: u64, s2: u64, n1 in 1usize..=4, n2 in 1usize..=3, bb: bool) {
        let time = if bb { 0 } else { 1 };
        let a = timed(s1, n1, false, time);
        let b = timed(s2, n2, false, time);
        let kind = if bb { DistanceKind::BbGh } else { DistanceKind::FdHh };
        let ab = distance(kind, &a, &b, DEFAULT_BUDGET, DEFAULT_TOL).unwrap();
        let ba = distance(kind, &b, &a, DEFAULT_BUDGET, DEFAULT_TOL).unwrap();
        prop_assert_eq!((ab.lower, ab.upper), (ba.lower, ba.upper));
    }

    #[test]
    fn identity_gives_zero(seed: u64, n in 1usize..=4, graph: bool, time in 0u8..3) {
        let t = timed(seed, n, graph, time);
        let mut kinds = vec![DistanceKind::Gh, DistanceKind::KappaGh, DistanceKind::TauH, DistanceKind::PtGh];
        match classify(&t, DEFAULT_TOL) {
            TimeClass::BigBang => kinds.extend([DistanceKind::BbGh, DistanceKind::FdHh]),
            TimeClass::FutureDeveloped => kinds.push(DistanceKind::FdHh),
            TimeClass::Generic => {}
        }
        for kind in kinds {
            let r = distance(kind, &t, &t, DEFAULT_BUDGET, DEFAULT_TOL).unwrap();
            prop_assert!(r.is_exact, "{kind} not exact");
            prop_assert_eq!((r.lower, r.upper), (0.0, 0.0));
        }
    }

    #[test]
    fn certificates_reproduce_upper(s1: u64, s2: u64, n1 in 1usize..=4, n2 in 1usize..=4, time in 0u8..2) {
        let a = timed(s1, n1, true, time);
        let b = timed(s2, n2, false, time);
        for kind in DistanceKind::ALL {
            if kind == DistanceKind::BbGh && time == 1 {
                continue;
            }
            let r = distance(kind, &a, &b, DEFAULT_BUDGET, DEFAULT_TOL).unwrap();
            prop_assert!(0.0 <= r.lower && r.lower <= r.upper);
            prop_assert!(!r.is_exact || r.upper - r.lower <= 1e-12);
            let v = evaluate_certificate(kind, &r.certificate, &a, &b);
            prop_assert!((v - r.upper).abs() <= 1e-12, "{kind}: {v} vs {}", r.upper);
        }
    }

    #[test]
    fn pruning_is_sound(s1: u64, s2: u64, n1 in 1usize..=3, n2 in 1usize..=3, time in 0u8..3) {
        let a = timed(s1, n1, false, time);
        let b = timed(s2, n2, true, time);
        let all = all_correspondences(n1, n2);
        let (x1, x2) = (a.base(), b.base());
        let gh = min_over(&all, |r| distortion(&Correspondence::new(n1, n2, r.to_vec()).unwrap(), x1, x2) / 2.0);
        prop_assert_eq!(gh_distance(x1, x2, DEFAULT_BUDGET).upper, gh);
        prop_assert_eq!(kappa_gh_distance(x1, x2, DEFAULT_BUDGET).upper, min_over(&all, |r| frechet_cost(r, x1, x2)));
        prop_assert_eq!(tau_h_distance(&a, &b, DEFAULT_BUDGET).upper, min_over(&all, |r| timed_frechet_cost(r, &a, &b)));
    }

    #[test]
    fn pointed_interval_brackets_the_grid(s1: u64, s2: u64, n1 in 1usize..=3, n2 in 1usize..=3) {
        let x1 = space(s1, n1, false);
        let x2 = space(s2, n2, true);
        let (p1, p2) = ((s1 as usize) % n1, (s2 as usize) % n2);
        let r = pointed_gh(&x1, p1, &x2, p2, DEFAULT_BUDGET).unwrap();
        let grid = (x1.diameter() + x2.diameter()).max(1.0) / 8.0;
        let mut best = f64::INFINITY;
        for pairs in all_correspondences(n1, n2).into_iter().filter(|r| r.contains(&(p1, p2))) {
            let c = Correspondence::new(n1, n2, pairs).unwrap();
            let dis = distortion(&c, &x1, &x2);
            for k in 0..6 {
                let delta = dis / 2.0 + k as f64 * grid + 1e-6;
                let g = glue_by_correspondence(&x1, &x2, &c, delta).unwrap();
                let v = hausdorff_in(&g.z, &g.inject1, &g.inject2).unwrap() + g.z.dist(p1, n1 + p2);
                prop_assert!(v >= r.upper / 2.0 - 1e-12);
                best = best.min(v);
            }
        }
        prop_assert!(best >= r.upper - 1e-12);
        prop_assert!(best <= r.upper + 2e-6 + 1e-12);
    }

    #[test]
    fn gluing_at_half_distortion_is_a_metric(s1: u64, s2: u64, n1 in 1usize..=4, n2 in 1usize..=4) {
        let x1 = space(s1, n1, true);
        let x2 = space(s2, n2, false);
        let r = gh_distance(&x1, &x2, DEFAULT_BUDGET);
        let c = &r.certificate.correspondence;
        let dis = distortion(c, &x1, &x2);
        // Zero offsets would merge points; the validator demands distinct points.
        let delta = (dis / 2.0).max(10.0 * DEFAULT_TOL);
        let g = glue_by_correspondence(&x1, &x2, c, delta).unwrap();
        prop_assert!(hausdorff_in(&g.z, &g.inject1, &g.inject2).unwrap() <= delta + 1e-12);
        for &(p, q) in c.pairs() {
            prop_assert_eq!(cross_distance(&x1, &x2, c.pairs(), delta, p, q), delta);
            prop_assert_eq!(g.z.dist(p, n1 + q), delta);
        }
        for i in 0..n1 {
            for j in 0..n1 {
                prop_assert_eq!(g.z.dist(g.inject1[i], g.inject1[j]), x1.dist(i, j));
            }
        }
    }

    #[test]
    fn local_search_never_beats_exact(s1: u64, s2: u64, n1 in 1usize..=4, n2 in 1usize..=4, time in 0u8..2) {
        let a = timed(s1, n1, false, time);
        let b = timed(s2, n2, true, time);
        for kind in [DistanceKind::Gh, DistanceKind::KappaGh, DistanceKind::TauH, DistanceKind::PtGh, DistanceKind::FdHh] {
            let exact = distance(kind, &a, &b, DEFAULT_BUDGET, DEFAULT_TOL).unwrap();
            let ls = local_search_upper(kind, &a, &b, s1, 400).unwrap();
            prop_assert!(!ls.is_exact);
            prop_assert!(ls.upper >= exact.upper - 1e-9, "{kind}: {} < {}", ls.upper, exact.upper);
            prop_assert!(ls.lower <= ls.upper);
            prop_assert_eq!(evaluate_certificate(kind, &ls.certificate, &a, &b), ls.upper);
            prop_assert_eq!(&ls, &local_search_upper(kind, &a, &b, s1, 400).unwrap());
        }
    }

    #[test]
    fn local_search_finds_identity(seed: u64, n in 1usize..=6, time in 0u8..2) {
        let t = timed(seed, n, false, time);
        for kind in [DistanceKind::Gh, DistanceKind::KappaGh, DistanceKind::TauH, DistanceKind::PtGh, DistanceKind::FdHh] {
            prop_assert_eq!(local_search_upper(kind, &t, &t, seed, 300).unwrap().upper, 0.0);
        }
    }

    #[test]
    fn simple_bounds_hold(s1: u64, s2: u64, n1 in 1usize..=4, n2 in 1usize..=4, time in 0u8..3) {
        let a = timed(s1, n1, false, time);
        let b = timed(s2, n2, false, time);
        let gh = gh_distance(a.base(), b.base(), DEFAULT_BUDGET).upper;
        let th = tau_h_distance(&a, &b, DEFAULT_BUDGET).upper;
        prop_assert!(simple_lower_bounds(DistanceKind::Gh, &a, &b) <= gh + 1e-12);
        prop_assert!(simple_lower_bounds(DistanceKind::TauH, &a, &b) <= th + 1e-12);
        prop_assert!(time_range_bound(&a, &b) <= th + 1e-12);
    }
}

#[test]
fn walker_stream_matches_iterator() {
    for (n1, n2) in [(3, 3), (4, 2), (2, 4)] {
        let mut w = MinimalWalker::new(n1, n2);
        let mut from_walker = Vec::new();
        while let Some(p) = w.advance() {
            from_walker.push(p.to_vec());
        }
        let from_iter: Vec<_> = minimal_correspondences(n1, n2, u64::MAX).map(|c| c.pairs().to_vec()).collect();
        assert_eq!(from_walker, from_iter);
        let mut sorted = from_iter.clone();
        sorted.sort();
        assert_eq!(sorted, from_iter);
    }
}

#[test]
fn fd_hh_matches_brute_force_on_a_path() {
    // a - b - c with d(a, b) = 1, d(b, c) = 1, d(a, c) = 2.
    let x = FiniteMetricSpace::from_matrix(
        vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]],
        DEFAULT_TOL,
    )
    .unwrap();
    let one = make_future_developed(&x, &[0]).unwrap();
    let two = make_future_developed(&x, &[0, 1]).unwrap();
    let r = fd_hh(&one, &two, DEFAULT_BUDGET).unwrap();
    let (y1, y2) = (vec![0], vec![0, 1]);
    let admissible = all_correspondences(3, 3).into_iter().filter(|r| {
        y1.iter().all(|&a| y2.iter().any(|&b| r.contains(&(a, b))))
            && y2.iter().all(|&b| y1.iter().any(|&a| r.contains(&(a, b))))
    });
    let best = admissible
        .map(|p| tml_core::engine::glued_fd_objective(&p, &x, &x, &y1, &y2))
        .fold(f64::INFINITY, f64::min);
    assert_eq!(r.upper, best);
    assert!(r.lower <= r.upper && r.lower >= r.upper / 2.0);
    assert_eq!(fd_hh(&two, &two, DEFAULT_BUDGET).unwrap().upper, 0.0);
}
