//! Non-decreasing maps of the line (and of the circle, through their lifts)
//! together with the `d_D` metric between them.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

type MapFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Reduces a lift to `(k, r)` with `x = 2 pi k + r` and `r` in `[-pi, pi]`.
#[inline]
pub fn reduce_angle(x: f64) -> (f64, f64) {
    let k = (x / TAU).round();
    (k, x - TAU * k)
}

/// A right-continuous non-decreasing map `plus` paired with its
/// left-continuous modification `minus`.
///
/// `breakpoints` lists the points where the map jumps or loses smoothness
/// (one period's worth, in `[-pi, pi)`, for periodic maps). It is a hint for
/// grid and quadrature based computations; an empty list is valid for smooth
/// maps.
#[derive(Clone)]
pub struct MonotonePair {
    plus: MapFn,
    minus: MapFn,
    breakpoints: Vec<f64>,
    periodic: bool,
}

impl fmt::Debug for MonotonePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotonePair")
            .field("breakpoints", &self.breakpoints)
            .field("periodic", &self.periodic)
            .finish_non_exhaustive()
    }
}

impl MonotonePair {
    pub fn new<P, M>(plus: P, minus: M, breakpoints: Vec<f64>, periodic: bool) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        M: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        MonotonePair {
            plus: Arc::new(plus),
            minus: Arc::new(minus),
            breakpoints,
            periodic,
        }
    }

    /// A continuous non-decreasing map; both versions coincide.
    pub fn continuous<F>(f: F, periodic: bool) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let f: MapFn = Arc::new(f);
        MonotonePair {
            plus: f.clone(),
            minus: f,
            breakpoints: Vec::new(),
            periodic,
        }
    }

    /// Periodic map `x + displacement(x)` for a continuous `2pi`-periodic
    /// displacement.
    pub fn from_displacement<F>(displacement: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::continuous(move |x| x + displacement(x), true)
    }

    pub fn identity() -> Self {
        Self::continuous(|x| x, true)
    }

    pub fn translation(a: f64) -> Self {
        Self::continuous(move |x| x + a, true)
    }

    #[inline]
    pub fn plus(&self, x: f64) -> f64 {
        (self.plus)(x)
    }

    #[inline]
    pub fn minus(&self, x: f64) -> f64 {
        (self.minus)(x)
    }

    /// `plus(x) - x`; periodic when the pair is.
    #[inline]
    pub fn displacement(&self, x: f64) -> f64 {
        self.plus(x) - x
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }
}

const GRID_POINTS: usize = 2048;
const METRIC_TOL: f64 = 1e-7;

/// Checks `a+(x) <= b+(x + eps) + eps` for all x in `[lo, hi]`, sampled on
/// `grid` plus the breakpoints of either map.
fn dominated(a: &MonotonePair, b: &MonotonePair, eps: f64, grid: &[f64], lo: f64, hi: f64) -> bool {
    let slack = 1e-12;
    let ok = |x: f64| a.plus(x) <= b.plus(x + eps) + eps + slack;
    if !grid.iter().all(|&x| ok(x)) {
        return false;
    }
    let windows: Vec<f64> = if a.periodic {
        vec![-TAU, 0.0, TAU]
    } else {
        vec![0.0]
    };
    for shift in &windows {
        for &j in &a.breakpoints {
            let x = j + shift;
            if x >= lo && x <= hi && !ok(x) {
                return false;
            }
        }
        // Just left of a jump of b at x + eps the right side drops to b-.
        for &j in &b.breakpoints {
            let x = j + shift - eps;
            if x > lo && x <= hi && a.minus(x) > b.minus(j + shift) + eps + slack {
                return false;
            }
        }
    }
    true
}

fn feasible(f: &MonotonePair, g: &MonotonePair, eps: f64, grid: &[f64], lo: f64, hi: f64) -> bool {
    dominated(f, g, eps, grid, lo, hi) && dominated(g, f, eps, grid, lo, hi)
}

fn bisect_eps(f: &MonotonePair, g: &MonotonePair, grid: &[f64], lo: f64, hi: f64, cap: f64) -> f64 {
    let mut upper = cap;
    if !feasible(f, g, upper, grid, lo, hi) {
        return cap;
    }
    if feasible(f, g, 0.0, grid, lo, hi) {
        return 0.0;
    }
    let mut lower = 0.0;
    while upper - lower > METRIC_TOL {
        let mid = 0.5 * (lower + upper);
        if feasible(f, g, mid, grid, lo, hi) {
            upper = mid;
        } else {
            lower = mid;
        }
    }
    upper
}

/// The circle distance
/// `inf{eps >= 0 : f+(x) <= g+(x+eps)+eps and g+(x) <= f+(x+eps)+eps for all x}`.
///
/// The supremum over x is taken on a 2048-point grid over one period
/// together with the breakpoints of both maps; between jumps the maps are
/// assumed smooth. Accuracy is about `1e-7` plus the grid error.
pub fn metric_dd(f: &MonotonePair, g: &MonotonePair) -> f64 {
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| -PI + TAU * i as f64 / GRID_POINTS as f64)
        .collect();
    let bound = grid
        .iter()
        .map(|&x| (f.plus(x) - g.plus(x)).abs())
        .fold(0.0, f64::max)
        + f.breakpoints.iter().chain(&g.breakpoints).map(|&x| (f.plus(x) - g.plus(x)).abs()).fold(0.0, f64::max)
        + 1e-6;
    bisect_eps(f, g, &grid, -PI, PI, bound.max(1e-6))
}

/// The windowed distance `d_n` restricted to `x in [-n, n - eps]`, capped at 1.
fn metric_window(f: &MonotonePair, g: &MonotonePair, n: u32) -> f64 {
    let half = n as f64;
    let points = GRID_POINTS * n as usize;
    // Bisection over eps uses the grid on [-n, n]; points beyond n - eps are
    // dropped per trial value.
    let base: Vec<f64> = (0..=points)
        .map(|i| -half + 2.0 * half * i as f64 / points as f64)
        .collect();
    let mut upper = 1.0;
    let check = |eps: f64| {
        let grid: Vec<f64> = base.iter().copied().filter(|&x| x <= half - eps).collect();
        feasible(f, g, eps, &grid, -half, half - eps)
    };
    if !check(upper) {
        return 1.0;
    }
    if check(0.0) {
        return 0.0;
    }
    let mut lower = 0.0;
    while upper - lower > METRIC_TOL {
        let mid = 0.5 * (lower + upper);
        if check(mid) {
            upper = mid;
        } else {
            lower = mid;
        }
    }
    upper
}

/// Number of windows kept in the line metric; the tail is below `2^-32`.
pub const LINE_METRIC_TERMS: u32 = 32;

/// The line distance `sum_n 2^-n (d_n(f, g) ^ 1)`, truncated after
/// [`LINE_METRIC_TERMS`] windows.
pub fn metric_dbar(f: &MonotonePair, g: &MonotonePair) -> f64 {
    let mut total = 0.0;
    let mut prev = 0.0_f64;
    for n in 1..=LINE_METRIC_TERMS {
        // d_n is non-decreasing in n; once it saturates at 1 it stays there.
        let d = if prev >= 1.0 { 1.0 } else { metric_window(f, g, n) };
        total += d.min(1.0) * 0.5_f64.powi(n as i32);
        prev = d;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_angle_round_trip() {
        for &x in &[0.0, 1.0, -3.0, 7.0, 100.0, -100.0, PI, -PI] {
            let (k, r) = reduce_angle(x);
            assert!((-PI..=PI).contains(&r));
            assert!((TAU * k + r - x).abs() < 1e-12);
        }
    }

    #[test]
    fn distance_to_self_is_zero() {
        let f = MonotonePair::from_displacement(|x| 0.3 * x.sin());
        assert_eq!(metric_dd(&f, &f), 0.0);
    }

    #[test]
    fn translation_distance_is_half_shift() {
        let id = MonotonePair::identity();
        for &a in &[0.01, 0.2, 1.0] {
            let d = metric_dd(&id, &MonotonePair::translation(a));
            assert!((d - a / 2.0).abs() < 1e-6, "a={a} d={d}");
        }
    }

    #[test]
    fn symmetric() {
        let f = MonotonePair::from_displacement(|x| 0.3 * x.sin());
        let g = MonotonePair::from_displacement(|x| 0.1 * (2.0 * x).cos() + 0.05);
        let a = metric_dd(&f, &g);
        let b = metric_dd(&g, &f);
        assert!((a - b).abs() < 1e-6);
        assert!(a > 0.0);
    }

    #[test]
    fn jump_map_distance() {
        // Displacement jumps by h at 0 and vanishes at +-pi.
        let h = 0.4;
        let disp = move |r: f64, right: bool| {
            let s = if r > 0.0 || (r == 0.0 && right) { 1.0 } else { -1.0 };
            s * h / 2.0 * (1.0 - r.abs() / PI)
        };
        let step = MonotonePair::new(
            move |x| {
                let (k, r) = reduce_angle(x);
                TAU * k + r + disp(r, true)
            },
            move |x| {
                let (k, r) = reduce_angle(x);
                TAU * k + r + disp(r, false)
            },
            vec![0.0],
            true,
        );
        let d = metric_dd(&step, &MonotonePair::identity());
        assert!((d - h / 4.0).abs() < 1e-6, "{d}");
    }

    #[test]
    fn line_metric_translation() {
        let id = MonotonePair::continuous(|x| x, false);
        let shifted = MonotonePair::continuous(|x| x + 0.2, false);
        let d = metric_dbar(&id, &shifted);
        // d_n = 0.1 for every window.
        assert!((d - 0.1).abs() < 1e-6, "{d}");
        assert_eq!(metric_dbar(&id, &id), 0.0);
    }
}
