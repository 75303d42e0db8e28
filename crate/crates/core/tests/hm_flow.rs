use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hl0::flow::{
    embed_interval, flow_map, flow_pair, read_trajectories_csv, track_points, write_trajectories_csv, Embedding,
    FlowStart, FlowTracker, Interval, TRAJECTORY_CSV_HEADER,
};
use hl0::{ClusterState, Family, FlowDirection, FlowQuery, MapDirection, ParticleSpec, Scaling, Version};

fn cluster(family: Family, delta: f64, n: usize, seed: u64) -> ClusterState {
    ClusterState::grow(&ParticleSpec::new(family, delta).unwrap(), n, seed)
}

/// Distance between two angles on the circle.
fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flow_composes(seed in 0u64..1000, m in 0usize..60, k in 0usize..60, n in 0usize..60, x in -10.0f64..10.0) {
        let c = cluster(Family::Arc, 0.2, 60, seed);
        let mut l = [m, k, n];
        l.sort();
        let [m, k, n] = l;
        let fw = |a, b, y| flow_map(&c, FlowQuery::forward(a, b), y).unwrap();
        let bw = |a, b, y| flow_map(&c, FlowQuery::backward(a, b), y).unwrap();
        prop_assert_eq!(fw(m, n, x), fw(k, n, fw(m, k, x)));
        prop_assert_eq!(bw(m, n, x), bw(m, k, bw(k, n, x)));
        prop_assert_eq!(fw(m, m, x), x);
    }

    #[test]
    fn flow_is_monotone_and_periodic(seed in 0u64..1000, a in -10.0f64..10.0, gap in 0.0f64..0.5) {
        let c = cluster(Family::Slit, 0.1, 200, seed);
        for dir in [FlowDirection::Forward, FlowDirection::Backward] {
            let pair = flow_pair(&c, 10, 200, dir).unwrap();
            prop_assert!(pair.plus(a) <= pair.plus(a + gap));
            prop_assert!(pair.minus(a) <= pair.plus(a));
            // Right-continuous plus below left-continuous minus further right.
            prop_assert!(pair.plus(a) <= pair.minus(a + gap + 1e-12));
            prop_assert!((pair.plus(a + TAU) - pair.plus(a) - TAU).abs() <= 1e-9);
            prop_assert!((pair.minus(a - TAU) - pair.minus(a) + TAU).abs() <= 1e-9);
        }
    }
}

#[test]
fn backward_flow_is_a_generalized_inverse() {
    // Jump points of the composite are not resolvable in floating point, so
    // the image is nudged outward by `eta` before mapping back.
    let eta = 1e-9;
    for family in [Family::Slit, Family::Arc] {
        let c = cluster(family, 0.1, 300, 8);
        let g = flow_pair(&c, 0, 300, FlowDirection::Forward).unwrap();
        let f = flow_pair(&c, 0, 300, FlowDirection::Backward).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5000 {
            let x = rng.random_range(-PI..PI);
            let y = f.plus(x);
            assert!(g.minus(y - eta) <= x && x <= g.plus(y + eta), "{family:?} {x}");
            let y = g.plus(x);
            assert!(f.minus(y - eta) <= x && x <= f.plus(y + eta), "{family:?} {x}");
        }
    }
}

#[test]
fn slit_backward_flow_undoes_forward_flow() {
    // Slit g-maps are injective, so f o g is the identity wherever the forward
    // flow has not squeezed a neighbourhood of x below rounding.
    let c = cluster(Family::Slit, 0.1, 60, 12);
    let g = |x| flow_map(&c, FlowQuery::forward(0, 60), x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for _ in 0..2000 {
        let x = rng.random_range(-PI..PI);
        let h = 1e-6;
        if (g(x + h) - g(x - h)) / (2.0 * h) < 1e-3 {
            continue;
        }
        let back = flow_map(&c, FlowQuery::backward(0, 60), g(x)).unwrap();
        assert!((back - x).abs() < 1e-9, "{x} {back}");
        checked += 1;
    }
    assert!(checked > 1000, "{checked}");
}

#[test]
fn backward_flow_gives_boundary_angles_of_the_cluster() {
    // arg Phi_{n-1}(e^{i Theta_n}) for particles attaching to the disc is the
    // backward flow of Theta_n, and e^{i x} is the attachment point itself.
    let c = cluster(Family::Slit, 0.1, 400, 31);
    let mut seen = 0;
    for r in c.records().iter().filter(|r| r.parent == 0) {
        let x = flow_map(&c, FlowQuery::backward(0, r.index - 1), r.theta).unwrap();
        assert!(circ(x, r.attach_point.arg()) < 1e-8, "{} {x} {}", r.index, r.attach_point);
        assert!(circ(x, r.local_coord) < 1e-12);
        seen += 1;
    }
    assert!(seen > 10);
}

#[test]
fn version_minus_differs_only_at_jumps() {
    let s = ParticleSpec::new(Family::Arc, 0.2).unwrap();
    let c = ClusterState::from_thetas(&s, 0, vec![0.0], 1);
    let q = FlowQuery::backward(0, 1);
    let plus = |x| flow_map(&c, q, x).unwrap();
    let minus = |x| flow_map(&c, q.with_version(Version::Minus), x).unwrap();
    assert_eq!(plus(s.q), s.p);
    assert_eq!(minus(s.q), 0.0);
    assert_eq!(plus(1.0), minus(1.0));
}

#[test]
fn flow_query_errors() {
    let c = cluster(Family::Slit, 0.1, 10, 0);
    assert!(flow_map(&c, FlowQuery::forward(5, 4), 0.0).is_err());
    assert!(flow_map(&c, FlowQuery::forward(0, 11), 0.0).is_err());
    assert!(track_points(&c, &[], FlowDirection::Forward, 10, Scaling::None).is_err());
    let s = [FlowStart { level: 3, lift: 0.0 }];
    assert!(track_points(&c, &s, FlowDirection::Backward, 4, Scaling::None).is_err());
    assert!(track_points(&c, &s, FlowDirection::Forward, 11, Scaling::None).is_err());
}

#[test]
fn identical_and_shifted_starts_coalesce_immediately() {
    let c = cluster(Family::Slit, 0.1, 50, 4);
    let starts = [
        FlowStart { level: 0, lift: 1.0 },
        FlowStart { level: 0, lift: 1.0 },
        FlowStart { level: 0, lift: 1.0 + TAU },
        FlowStart { level: 0, lift: -2.0 },
    ];
    let t = track_points(&c, &starts, FlowDirection::Forward, 50, Scaling::None).unwrap();
    assert_eq!(t[0].coalesced_with[0], -1);
    assert_eq!(t[1].coalesced_with[0], 0);
    assert_eq!(t[2].coalesced_with[0], 0);
    for i in 0..t[0].angles.len() {
        assert_eq!(t[1].angles[i], t[0].angles[i]);
        assert_eq!(t[2].angles[i], t[0].angles[i] + TAU);
    }
    assert_eq!(t[3].coalescence_row(), None);
}

#[test]
fn coalescence_is_absorbing_and_exact() {
    let c = cluster(Family::Slit, 0.1, 4000, 17);
    let starts: Vec<FlowStart> = (0..12)
        .map(|i| FlowStart {
            level: 4000,
            lift: -PI + TAU * i as f64 / 12.0,
        })
        .collect();
    let t = track_points(&c, &starts, FlowDirection::Backward, 0, Scaling::None).unwrap();
    let mut merged = 0;
    for tr in &t {
        assert_eq!(tr.steps.first(), Some(&0));
        assert_eq!(tr.steps.last(), Some(&4000));
        // Rows are stored in increasing level; merging happens as the level
        // decreases, so coalesced rows form a prefix.
        if let Some(row) = tr.coalescence_row() {
            assert!(row == 0 || tr.coalesced_with[..row].iter().all(|&w| w < 0));
            let last_free = tr.coalesced_with.iter().rposition(|&w| w >= 0).unwrap();
            assert!(tr.coalesced_with[..=last_free].iter().all(|&w| w >= 0));
            let leader = tr.coalesced_with[0] as usize;
            assert!(leader < tr.point_id);
            let k = (tr.angles[0] - t[leader].angles[0]) / TAU;
            assert!((k - k.round()).abs() < 1e-12);
            merged += 1;
        }
    }
    assert!(merged > 0, "no coalescence in 4000 backward steps");
    // Monotone order of lifts is preserved along the flow.
    for row in 0..t[0].angles.len() {
        for w in t.windows(2) {
            assert!(w[0].angles[row] <= w[1].angles[row]);
        }
    }
}

#[test]
fn trajectories_follow_flow_map() {
    let c = cluster(Family::Arc, 0.1, 500, 6);
    let starts = [FlowStart { level: 500, lift: 0.3 }, FlowStart { level: 250, lift: 2.0 }];
    let t = track_points(&c, &starts, FlowDirection::Backward, 100, Scaling::None).unwrap();
    for (tr, s) in t.iter().zip(&starts) {
        assert_eq!(tr.steps, (100..=s.level).collect::<Vec<_>>());
        for (i, &lvl) in tr.steps.iter().enumerate() {
            let want = flow_map(&c, FlowQuery::backward(lvl, s.level), s.lift).unwrap();
            assert_eq!(tr.angles[i], want);
        }
    }
    let fw = track_points(&c, &[FlowStart { level: 10, lift: 0.3 }], FlowDirection::Forward, 400, Scaling::None)
        .unwrap();
    for (i, &lvl) in fw[0].steps.iter().enumerate() {
        assert_eq!(fw[0].angles[i], flow_map(&c, FlowQuery::forward(10, lvl), 0.3).unwrap());
    }
}

#[test]
fn scalings_rescale_time_and_angle() {
    let c = cluster(Family::Slit, 0.1, 100, 1);
    let s = c.spec();
    let start = [FlowStart { level: 0, lift: 0.5 }];
    let raw = track_points(&c, &start, FlowDirection::Forward, 100, Scaling::None).unwrap();
    let long = track_points(&c, &start, FlowDirection::Forward, 100, Scaling::Long).unwrap();
    let local = track_points(&c, &start, FlowDirection::Forward, 100, Scaling::Local).unwrap();
    for i in 0..=100 {
        assert_eq!(raw[0].times[i], i as f64);
        assert!((long[0].times[i] - i as f64 / s.rho).abs() < 1e-15);
        assert!((local[0].times[i] - s.c * i as f64).abs() < 1e-15);
        assert_eq!(long[0].angles[i], raw[0].angles[i]);
        assert!((local[0].angles[i] * s.delta_star.sqrt() - raw[0].angles[i]).abs() < 1e-12);
    }
}

#[test]
fn trajectory_csv_round_trip() {
    let c = cluster(Family::Slit, 0.1, 30, 2);
    let starts = [FlowStart { level: 0, lift: 0.1 }, FlowStart { level: 0, lift: 0.1 }];
    let t = track_points(&c, &starts, FlowDirection::Forward, 30, Scaling::Long).unwrap();
    let mut buf = Vec::new();
    write_trajectories_csv(&mut buf, &t).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next(), Some("step,time,point_id,lift,coalesced_with"));
    assert_eq!(TRAJECTORY_CSV_HEADER, "step,time,point_id,lift,coalesced_with");
    assert_eq!(read_trajectories_csv(&text, Scaling::Long).unwrap(), t);
    assert!(read_trajectories_csv("a,b\n1,2\n", Scaling::None).is_err());
}

#[test]
fn tracker_matches_pairwise_and_sorted_merging() {
    // 16 points use the pairwise pass, 40 the sorted sweep; both must agree.
    let s = ParticleSpec::new(Family::Slit, 0.2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let thetas: Vec<f64> = (0..3000).map(|_| rng.random_range(0.0..TAU)).collect();
    for count in [16usize, 40] {
        let starts: Vec<f64> = (0..count).map(|i| TAU * i as f64 / count as f64).collect();
        let mut tr = FlowTracker::new(&s, MapDirection::F, Version::Plus, &starts);
        for &th in &thetas {
            tr.step(th);
        }
        // Independent count of distinct points on the circle.
        let mut naive: Vec<f64> = starts.clone();
        for &th in &thetas {
            for x in naive.iter_mut() {
                *x = th + s.circle_lift(MapDirection::F, Version::Plus, *x - th);
            }
        }
        let mut reps: Vec<f64> = Vec::new();
        for x in naive {
            if !reps.iter().any(|&r| circ(r, x) < 1e-12) {
                reps.push(x);
            }
        }
        assert_eq!(tr.groups(), reps.len(), "{count}");
        assert_eq!(tr.steps_done(), 3000);
    }
}

#[test]
fn interval_embedding() {
    let e = embed_interval(Interval::left_open(0.1, 0.35), 10.0).unwrap();
    assert_eq!(e, Embedding::Levels { first: 2, last: 3 });
    assert_eq!(e.flow_levels(), Some((1, 3)));
    let e = embed_interval(Interval::new(0.1, 0.3, true, true), 10.0).unwrap();
    assert_eq!(e, Embedding::Levels { first: 1, last: 3 });
    let e = embed_interval(Interval::left_open(0.11, 0.15), 10.0).unwrap();
    assert_eq!(e, Embedding::Identity);
    assert_eq!(e.flow_levels(), None);
    assert!(embed_interval(Interval::left_open(0.2, 0.1), 10.0).is_err());
    assert!(embed_interval(Interval::left_open(0.0, 1.0), 0.0).is_err());
}
