use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hl0::{ClusterState, Family, Hl0Error, ParticleSpec, Pullback};

fn spec(family: Family, delta: f64) -> ParticleSpec {
    ParticleSpec::new(family, delta).unwrap()
}

/// Point `s in [0, 1]` along the unrotated basic particle.
fn basic_point(s: &ParticleSpec, u: f64) -> Complex64 {
    match s.family {
        Family::Slit => Complex64::new(1.0 + s.delta * u, 0.0),
        Family::Arc => {
            let r = s.delta / (2.0 - s.delta);
            let w = Complex64::from_polar(r, -FRAC_PI_2 + PI * u);
            (1.0 + w) / (1.0 - w)
        }
    }
}

/// Distance from `a` to `Phi_{k-1}(e^{i Theta_k} P)`: coarse scan followed by
/// golden-section refinement around the best sample.
fn distance_to_particle(c: &ClusterState, k: usize, a: Complex64) -> f64 {
    let rot = Complex64::from_polar(1.0, c.thetas()[k - 1]);
    let d = |u: f64| (c.eval_phi(k - 1, rot * basic_point(c.spec(), u)).unwrap() - a).norm();
    let m = 400;
    let best = (0..=m)
        .min_by(|&i, &j| d(i as f64 / m as f64).total_cmp(&d(j as f64 / m as f64)))
        .unwrap();
    let (mut lo, mut hi) = (
        (best as f64 - 1.0).max(0.0) / m as f64,
        (best as f64 + 1.0).min(m as f64) / m as f64,
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        if d(x1) < d(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    d(0.5 * (lo + hi)).min(d(best as f64 / m as f64))
}

#[test]
fn gamma_inverts_phi_away_from_the_cluster() {
    for family in [Family::Slit, Family::Arc] {
        let c = ClusterState::grow(&spec(family, 0.1), 1000, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let z = Complex64::from_polar(rng.random_range(1.5..20.0), rng.random_range(-PI..PI));
            let w = c.eval_phi(1000, z).unwrap();
            match c.eval_gamma(1000, w).unwrap() {
                Pullback::Point(back) => assert!((back - z).norm() <= 1e-9 * z.norm(), "{z} {back}"),
                Pullback::Swallowed(j) => panic!("{z} swallowed at {j}"),
            }
        }
    }
}

#[test]
fn capacity_matches_circle_mean_of_log_modulus() {
    // log|Phi_n(z) / z| is harmonic on |z| > 1 with value c n at infinity,
    // so its circle mean is exactly c n; the trapezoid rule is spectrally
    // accurate for it.
    for family in [Family::Slit, Family::Arc] {
        let c = ClusterState::grow(&spec(family, 0.1), 2000, 11);
        let radius = 3.0;
        let m = 1024;
        let mean = (0..m)
            .map(|i| {
                let z = Complex64::from_polar(radius, TAU * i as f64 / m as f64);
                (c.eval_phi(2000, z).unwrap() / z).norm().ln()
            })
            .sum::<f64>()
            / m as f64;
        assert!((mean - c.capacity()).abs() < 1e-3, "{family:?} {mean} {}", c.capacity());
        assert_eq!(c.capacity(), 2000.0 * c.spec().c);
    }
}

#[test]
fn attachment_points_lie_on_their_parent() {
    for (family, delta) in [(Family::Slit, 0.2), (Family::Arc, 0.2)] {
        let c = ClusterState::grow(&spec(family, delta), 300, 7);
        let mut on_disc = 0;
        for rec in c.records() {
            let a = rec.attach_point;
            if rec.parent == 0 {
                on_disc += 1;
                assert!((a.norm() - 1.0).abs() < 1e-9, "{} {a}", rec.index);
            } else {
                assert!(rec.parent < rec.index);
                assert!(rec.local_coord.abs() < c.spec().q);
                let d = distance_to_particle(&c, rec.parent, a);
                assert!(d <= 1e-6, "particle {} parent {} distance {d}", rec.index, rec.parent);
            }
        }
        assert!(on_disc > 0 && on_disc < 300);
    }
}

#[test]
fn parent_of_small_examples() {
    let s = spec(Family::Slit, 0.1);
    let q = s.q;
    let c = ClusterState::from_thetas(&s, 0, vec![0.0, q / 2.0], 1);
    let (p, r) = c.parent_of(2).unwrap();
    assert_eq!(p, 1);
    assert!((r - q / 2.0).abs() < 1e-15);

    let c = ClusterState::from_thetas(&s, 0, vec![0.0, 3.0 * q], 1);
    assert_eq!(c.parent_of(2).unwrap().0, 0);
    assert_eq!(c.parent_of(1).unwrap().0, 0);

    // Angles differing by a full turn hit the same particle.
    let c = ClusterState::from_thetas(&s, 0, vec![1.0, 1.0 + TAU + q / 4.0], 1);
    assert_eq!(c.parent_of(2).unwrap().0, 1);

    assert!(matches!(c.parent_of(0), Err(Hl0Error::OutOfRange { .. })));
    assert!(matches!(c.parent_of(3), Err(Hl0Error::OutOfRange { .. })));
}

#[test]
fn records_are_ordered_and_complete() {
    let c = ClusterState::grow(&spec(Family::Arc, 0.1), 500, 1);
    assert_eq!(c.n(), 500);
    assert_eq!(c.thetas().len(), 500);
    for (i, r) in c.records().iter().enumerate() {
        assert_eq!(r.index, i + 1);
        assert_eq!(r.theta, c.thetas()[i]);
        assert!(r.parent < r.index);
        assert!((0.0..TAU).contains(&r.theta));
    }
}

#[test]
fn single_particle_and_empty_cluster() {
    let s = spec(Family::Slit, 0.3);
    let c0 = ClusterState::grow(&s, 0, 5);
    assert_eq!(c0.n(), 0);
    assert_eq!(c0.capacity(), 0.0);
    let z = Complex64::new(2.0, -1.0);
    assert_eq!(c0.eval_phi(0, z).unwrap(), z);
    assert!(c0.eval_phi(1, z).is_err());

    let c1 = ClusterState::grow(&s, 1, 5);
    let r = &c1.records()[0];
    assert_eq!(r.parent, 0);
    assert!((r.attach_point - Complex64::from_polar(1.0, r.theta)).norm() < 1e-15);
    // The tip of the only particle.
    let tip = c1.eval_phi(1, Complex64::from_polar(1.0, r.theta)).unwrap();
    assert!((tip - Complex64::from_polar(1.3, r.theta)).norm() < 1e-9, "{tip}");
}

#[test]
fn gamma_reports_swallowed_points() {
    let s = spec(Family::Arc, 0.3);
    let c = ClusterState::from_thetas(&s, 0, vec![0.5], 1);
    let inside_disc = Complex64::from_polar(0.5, 2.0);
    assert_eq!(c.eval_gamma(1, inside_disc).unwrap(), Pullback::Swallowed(0));
    let inside_cap = Complex64::from_polar(1.0 + 0.5 * s.delta, 0.5);
    assert_eq!(c.eval_gamma(1, inside_cap).unwrap(), Pullback::Swallowed(1));
    assert!(c.eval_phi(1, Complex64::new(0.2, 0.0)).is_err());
}

#[test]
fn cluster_sits_between_capacity_radii() {
    // A compact connected set of capacity C containing the unit disc
    // reaches radius C and stays within the Koebe radius 4C.
    for family in [Family::Slit, Family::Arc] {
        let c = ClusterState::grow(&spec(family, 0.1), 1500, 21);
        let cap = c.capacity().exp();
        let reach = c
            .all_particle_curves(5)
            .iter()
            .map(|p| p.max_radius())
            .fold(0.0, f64::max);
        assert!(reach >= cap * (1.0 - 1e-9) && reach <= 4.0 * cap, "{family:?} {reach} {cap}");
    }
}

#[test]
fn attachment_radii_track_capacity_growth() {
    // Averaged over seeds, log|attach_k| grows like c (k - 1) for small particles.
    let s = spec(Family::Slit, 0.05);
    let n = 2000;
    let seeds = 8;
    let mut acc = vec![0.0; n];
    for seed in 0..seeds {
        let c = ClusterState::grow(&s, n, seed);
        for (k, r) in c.records().iter().enumerate() {
            acc[k] += r.attach_point.norm().ln() / seeds as f64;
        }
    }
    let window = 200;
    let tail: f64 = acc[n - window..].iter().sum::<f64>() / window as f64;
    let expected = s.c * (n - window / 2 - 1) as f64;
    assert!((tail / expected - 1.0).abs() < 0.1, "{tail} vs {expected}");
}

#[test]
fn growth_is_deterministic_per_seed() {
    let s = spec(Family::Slit, 0.1);
    let a = ClusterState::grow(&s, 400, 99);
    let b = ClusterState::grow(&s, 400, 99);
    let d = ClusterState::grow(&s, 400, 100);
    assert_eq!(a, b);
    assert_ne!(a.thetas(), d.thetas());
    // Prefixes agree across lengths.
    let short = ClusterState::grow(&s, 100, 99);
    assert_eq!(&a.thetas()[..100], short.thetas());
    let thin = ClusterState::grow_thinned(&s, 400, 99, 50);
    assert_eq!(thin.records()[49].attach_point, a.records()[49].attach_point);
    assert!(thin.records()[10].attach_point.re.is_nan());
    assert_eq!(
        thin.records().iter().map(|r| r.parent).collect::<Vec<_>>(),
        a.records().iter().map(|r| r.parent).collect::<Vec<_>>()
    );
}
