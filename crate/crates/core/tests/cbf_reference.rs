use std::f64::consts::{PI, TAU};

use hl0::cbf::{collision_times, pair_collision_cdf, simulate_cbf, simulate_replica, CbfConfig, CbfDomain, CbfStart};

fn config(domain: CbfDomain, starts: &[(f64, f64)], horizon: f64, dt: f64, seed: u64) -> CbfConfig {
    CbfConfig {
        domain,
        starts: starts.iter().map(|&(s, x)| CbfStart { s, x }).collect(),
        horizon,
        dt,
        seed,
        bridge_correction: true,
    }
}

/// Sine-series survival of a Brownian motion of variance `2t` in `(0, 2pi)`.
fn eigen_survival(d: f64, t: f64) -> f64 {
    (0..2000)
        .map(|k| {
            let n = (2 * k + 1) as f64;
            4.0 / (n * PI) * (n * d / 2.0).sin() * (-n * n * t / 4.0).exp()
        })
        .sum()
}

fn line_cdf(d: f64, t: f64) -> f64 {
    libm::erfc(d / (2.0 * t.sqrt()))
}

#[test]
fn single_motion_has_unit_variance_rate() {
    let cfg = config(CbfDomain::Line, &[(0.0, 0.0)], 1.0, 1e-2, 5);
    let runs = 4000;
    let mut at = [Vec::new(), Vec::new()];
    for r in 0..runs {
        let t = &simulate_replica(&cfg, r, true).unwrap().trajectories[0];
        assert_eq!(t.times.len(), 101);
        at[0].push(t.angles[50]);
        at[1].push(t.angles[100]);
    }
    for (vals, time) in at.iter().zip([0.5, 1.0]) {
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|x| x * x).sum::<f64>() / n;
        assert!(mean.abs() < 3.0 * (time / n).sqrt(), "{time}: mean {mean}");
        let se = time * (2.0 / n).sqrt();
        assert!((var - time).abs() < 3.0 * se, "{time}: var {var}");
    }
}

#[test]
fn collision_law_is_label_free() {
    let pts = [(0.0, 0.3), (0.0, -1.1), (0.2, 0.9), (0.0, 2.0), (0.5, 0.0)];
    let base = config(CbfDomain::Circle, &pts, 2.0, 1e-3, 42);
    let perm = [3usize, 0, 4, 2, 1];
    let mut shuffled = base.clone();
    shuffled.starts = perm.iter().map(|&i| base.starts[i]).collect();
    let a = collision_times(&base, 50).unwrap();
    let b = collision_times(&shuffled, 50).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                assert_eq!(rb[i][j], ra[pi][pj]);
            }
        }
    }
}

#[test]
fn collision_times_are_ultrametric() {
    let pts: Vec<(f64, f64)> = (0..6).map(|i| (0.0, 0.4 * i as f64)).collect();
    let cfg = config(CbfDomain::Line, &pts, 3.0, 1e-3, 8);
    let inf = f64::INFINITY;
    for m in collision_times(&cfg, 200).unwrap() {
        let t = |i: usize, j: usize| if i == j { 0.0 } else { m[i][j].unwrap_or(inf) };
        for (i, row) in m.iter().enumerate() {
            assert_eq!(row[i].unwrap_or(0.0), 0.0);
            for (j, tij) in row.iter().enumerate() {
                assert_eq!(*tij, m[j][i]);
                for k in 0..6 {
                    assert!(t(i, k) <= t(i, j).max(t(j, k)), "{i} {j} {k}");
                }
            }
        }
    }
}

#[test]
fn circle_and_line_agree_for_short_times() {
    for d in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let tmax = (TAU - d).powi(2) / 32.0;
        for i in 1..=20 {
            let t = tmax * i as f64 / 20.0;
            let line = pair_collision_cdf(CbfDomain::Line, d, t).unwrap();
            let circle = pair_collision_cdf(CbfDomain::Circle, d, t).unwrap();
            assert!((line - circle).abs() <= 1e-4, "{d} {t}: {line} {circle}");
            assert!((line - line_cdf(d, t)).abs() < 1e-14);
        }
    }
}

#[test]
fn circle_cdf_matches_sine_series() {
    for d in [0.2, 1.0, PI, 5.5] {
        for t in [0.05, 0.3, 1.0, 4.0, 20.0] {
            let want = 1.0 - eigen_survival(d, t);
            let got = pair_collision_cdf(CbfDomain::Circle, d, t).unwrap();
            assert!((got - want).abs() < 1e-8, "{d} {t}: {got} {want}");
        }
    }
    // Symmetry d <-> 2pi - d and monotonicity in t.
    let a = pair_collision_cdf(CbfDomain::Circle, 1.3, 0.7).unwrap();
    let b = pair_collision_cdf(CbfDomain::Circle, TAU - 1.3, 0.7).unwrap();
    assert!((a - b).abs() < 1e-12);
    let mut last = 0.0;
    for i in 0..100 {
        let v = pair_collision_cdf(CbfDomain::Circle, 2.0, 0.05 * i as f64).unwrap();
        assert!(v >= last);
        last = v;
    }
}

#[test]
fn cdf_edge_cases() {
    assert_eq!(pair_collision_cdf(CbfDomain::Line, 0.0, 1.0).unwrap(), 1.0);
    assert_eq!(pair_collision_cdf(CbfDomain::Line, 1.0, 0.0).unwrap(), 0.0);
    assert_eq!(pair_collision_cdf(CbfDomain::Circle, TAU, 0.3).unwrap(), 1.0);
    assert!(pair_collision_cdf(CbfDomain::Line, -1.0, 1.0).is_err());
    assert!(pair_collision_cdf(CbfDomain::Circle, 7.0, 1.0).is_err());
}

/// Fraction of runs in which a pair at distance `d` met by `horizon`.
fn empirical_meeting(domain: CbfDomain, d: f64, horizon: f64, dt: f64, bridge: bool, runs: usize) -> f64 {
    let mut cfg = config(domain, &[(0.0, 0.0), (0.0, d)], horizon, dt, 13);
    cfg.bridge_correction = bridge;
    let all = collision_times(&cfg, runs).unwrap();
    all.iter().filter(|m| m[0][1].is_some_and(|t| t <= horizon)).count() as f64 / runs as f64
}

#[test]
fn bridge_correction_removes_discretization_bias() {
    let runs = 20_000;
    for (domain, d, horizon) in [(CbfDomain::Line, 1.0, 1.0), (CbfDomain::Circle, 3.0, 2.0)] {
        let exact = pair_collision_cdf(domain, d, horizon).unwrap();
        let with = empirical_meeting(domain, d, horizon, 1e-2, true, runs);
        let without = empirical_meeting(domain, d, horizon, 1e-2, false, runs);
        assert!((with - exact).abs() <= 0.02, "{domain:?}: corrected {with} vs {exact}");
        assert!((without - exact).abs() > (with - exact).abs(), "{domain:?}: {without} {with} {exact}");
        // Discrete monitoring only ever misses crossings.
        assert!(without < exact);
    }
}

#[test]
fn fine_grid_matches_the_pair_law() {
    let runs = 20_000;
    let exact = pair_collision_cdf(CbfDomain::Line, 1.0, 1.0).unwrap();
    let p = empirical_meeting(CbfDomain::Line, 1.0, 1.0, 1e-3, true, runs);
    let se = (exact * (1.0 - exact) / runs as f64).sqrt();
    assert!((p - exact).abs() < 4.0 * se, "{p} {exact} se {se}");
}

#[test]
fn late_starts_and_merged_paths() {
    let cfg = config(CbfDomain::Circle, &[(0.0, 0.0), (0.5, 0.0), (0.0, 0.0)], 1.0, 0.01, 3);
    let t = simulate_cbf(&cfg).unwrap();
    assert_eq!(t.len(), 3);
    assert_eq!(t[0].times.len(), 101);
    assert_eq!(t[1].times.len(), 51);
    assert!((t[1].times[0] - 0.5).abs() < 1e-12);
    // Identical starts merge at once and move together.
    assert_eq!(t[2].coalesced_with[0], 0);
    for i in 0..101 {
        assert_eq!(t[2].angles[i], t[0].angles[i]);
    }
    // Once merged, a late start stays on its partner modulo 2pi.
    if let Some(row) = t[1].coalescence_row() {
        for i in row..t[1].angles.len() {
            let k = (t[1].angles[i] - t[0].angles[i + 50]) / TAU;
            assert!((k - k.round()).abs() < 1e-9);
        }
    }
    // Same seed, same paths.
    assert_eq!(simulate_cbf(&cfg).unwrap(), t);
}

#[test]
fn invalid_configs_are_rejected() {
    let good = config(CbfDomain::Line, &[(0.0, 0.0)], 1.0, 0.01, 0);
    let mut bad = good.clone();
    bad.dt = 0.0;
    assert!(simulate_cbf(&bad).is_err());
    let mut bad = good.clone();
    bad.starts.clear();
    assert!(simulate_cbf(&bad).is_err());
    let mut bad = good.clone();
    bad.starts.push(CbfStart { s: 2.0, x: 0.0 });
    assert!(collision_times(&bad, 2).is_err());
    let mut bad = good;
    bad.starts[0].x = f64::NAN;
    assert!(simulate_cbf(&bad).is_err());
}
